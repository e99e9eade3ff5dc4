"""Plans, tasks, the plan text format, and the step-alignment rule.

The on-the-wire plan format is ``STEP 1: <text> | STEP 2: <text> | END``.
Alignment makes a generated plan the same length as its reference by
truncating extra steps or duplicating the last one; the reference is
never touched.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

from .env import ObjectTable, load_table
from .errors import (
    DuplicateIdError,
    EmptyPlanError,
    MalformedStepError,
    MissingTerminatorError,
    PlanEvalError,
    SchemaError,
)

SPLITS = ("train", "valid_seen", "valid_unseen", "test_seen", "test_unseen")

SEPARATOR = "|"
TERMINATOR = "END"

_STEP_PREFIX = re.compile(r"^step\s*(\d+)\s*:\s*", re.IGNORECASE)


@dataclass(frozen=True)
class Plan:
    """An ordered sequence of step texts.

    A plan is either a normal plan (every step non-empty, free of the
    separator and terminator tokens) or the degenerate "null plan" whose
    steps are all empty strings. The null plan stands in for an empty
    generation so that evaluation never crashes; it scores zero on every
    metric. ``warnings`` carries parser diagnostics and is excluded from
    equality.
    """

    steps: tuple[str, ...]
    warnings: tuple[str, ...] = field(default=(), compare=False, repr=False)

    def __post_init__(self) -> None:
        if not isinstance(self.steps, tuple):
            object.__setattr__(self, "steps", tuple(self.steps))
        if len(self.steps) == 0:
            raise EmptyPlanError("a plan needs at least one step")
        empties = [s.strip() == "" for s in self.steps]
        if any(empties) and not all(empties):
            raise MalformedStepError("empty steps are only allowed in a null plan")
        for s in self.steps:
            if SEPARATOR in s:
                raise MalformedStepError(f"step text contains the separator token: {s!r}")
            if TERMINATOR in s.split():
                raise MalformedStepError(f"step text contains a standalone END token: {s!r}")

    @classmethod
    def null(cls, length: int = 1) -> "Plan":
        """The null plan: ``length`` empty steps, scores 0 everywhere."""
        return cls(("",) * max(1, length))

    @property
    def is_null(self) -> bool:
        return all(s.strip() == "" for s in self.steps)

    def __len__(self) -> int:
        return len(self.steps)


@dataclass(frozen=True)
class AlignedPair:
    """A generated/reference plan pair forced to the reference length."""

    generated: Plan
    reference: Plan
    truncated_count: int
    padded_count: int

    def __post_init__(self) -> None:
        if len(self.generated) != len(self.reference):
            raise MalformedStepError("aligned plans must share the reference length")

    def __len__(self) -> int:
        return len(self.reference)


@dataclass(frozen=True)
class TaskRecord:
    """One evaluation unit: goal, reference plan, optional environment."""

    task_id: str
    goal: str
    reference_plan: Plan
    environment: ObjectTable | None = None
    split: str = "train"

    def __post_init__(self) -> None:
        if not self.task_id:
            raise SchemaError("task_id must be non-empty")
        if not self.goal.strip():
            raise SchemaError(f"task {self.task_id}: goal must be non-empty")
        if self.split not in SPLITS:
            raise SchemaError(
                f"task {self.task_id}: split {self.split!r} not one of {', '.join(SPLITS)}"
            )


def parse_plan(text: str, mode: str = "lenient") -> Plan:
    """Parse a plan-format string into a Plan.

    The ``STEP k:`` prefixes are case-insensitive and stripped; textual
    order wins over the declared indices, and an index mismatch is
    recorded as a warning on the returned plan. In strict mode a missing
    END terminator or an empty segment raises; lenient mode flags the
    former and skips the latter.
    """
    if mode not in ("strict", "lenient"):
        raise ValueError(f"unknown parse mode: {mode!r}")
    stripped = text.strip()
    if not stripped:
        raise EmptyPlanError("plan string is empty")

    segments = [seg.strip() for seg in stripped.split(SEPARATOR)]
    warnings: list[str] = []

    terminated = False
    if segments and segments[-1] == TERMINATOR:
        segments.pop()
        terminated = True
    elif segments and segments[-1].split()[-1:] == [TERMINATOR]:
        # END glued to the last step without a separator
        segments[-1] = segments[-1][: -len(TERMINATOR)].rstrip()
        terminated = True
    if not terminated:
        if mode == "strict":
            raise MissingTerminatorError("plan string does not end with END")
        warnings.append("missing-terminator")

    steps: list[str] = []
    indices: list[int | None] = []
    for seg in segments:
        match = _STEP_PREFIX.match(seg)
        content = seg[match.end() :].strip() if match else seg
        if not content:
            if mode == "strict":
                raise MalformedStepError(f"segment has no content: {seg!r}")
            warnings.append(f"empty-segment-skipped: {seg!r}")
            continue
        steps.append(content)
        indices.append(int(match.group(1)) if match else None)

    if not steps:
        raise EmptyPlanError("no steps found in plan string")
    declared = [i for i in indices if i is not None]
    if declared and declared != list(range(1, len(steps) + 1))[: len(declared)]:
        warnings.append(f"step-index-mismatch: declared {declared}")
    return Plan(tuple(steps), warnings=tuple(warnings))


def serialize_plan(plan: Plan) -> str:
    """Render a plan as ``STEP 1: ... | STEP 2: ... | END``."""
    if plan.is_null:
        raise EmptyPlanError("the null plan cannot be serialized")
    parts = [f"STEP {i}: {text}" for i, text in enumerate(plan.steps, start=1)]
    parts.append(TERMINATOR)
    return f" {SEPARATOR} ".join(parts)


def align(generated: Plan, reference: Plan) -> AlignedPair:
    """Force the generated plan to the reference length.

    Longer generations are cut off; shorter ones have their last step
    duplicated until the lengths match. Idempotent, and the reference is
    returned unchanged.
    """
    diff = len(generated) - len(reference)
    if diff > 0:
        gen = Plan(generated.steps[: len(reference)])
        return AlignedPair(gen, reference, truncated_count=diff, padded_count=0)
    if diff < 0:
        padding = (generated.steps[-1],) * (-diff)
        gen = Plan(generated.steps + padding)
        return AlignedPair(gen, reference, truncated_count=0, padded_count=-diff)
    return AlignedPair(generated, reference, truncated_count=0, padded_count=0)


# --- dataset and prediction files ----------------------------------------

_RECORD_KEYS = {"task_id", "goal", "reference_steps", "environment", "split"}


def task_record_from_dict(doc: Mapping) -> TaskRecord:
    """Build a TaskRecord from one dataset JSONL object."""
    if not isinstance(doc, Mapping):
        raise SchemaError("dataset record must be a JSON object")
    missing = {"task_id", "goal", "reference_steps", "split"} - set(doc)
    if missing:
        raise SchemaError(f"dataset record missing fields: {sorted(missing)}")
    extra = set(doc) - _RECORD_KEYS
    if extra:
        raise SchemaError(f"dataset record has unknown fields: {sorted(extra)}")
    steps = doc["reference_steps"]
    if not isinstance(steps, list) or not all(isinstance(s, str) for s in steps):
        raise SchemaError("reference_steps must be a list of strings")
    env_doc = doc.get("environment")
    environment = load_table(env_doc) if env_doc is not None else None
    return TaskRecord(
        task_id=str(doc["task_id"]),
        goal=str(doc["goal"]),
        reference_plan=Plan(tuple(steps)),
        environment=environment,
        split=str(doc["split"]),
    )


def task_record_to_dict(record: TaskRecord) -> dict:
    doc: dict = {
        "task_id": record.task_id,
        "goal": record.goal,
        "reference_steps": list(record.reference_plan.steps),
        "split": record.split,
    }
    if record.environment is not None:
        doc["environment"] = record.environment.to_document()
    return doc


def load_dataset(path: str | Path) -> list[TaskRecord]:
    """Read a dataset JSONL file; task_ids must be unique."""
    records: list[TaskRecord] = []
    seen: set[str] = set()
    for lineno, line in _iter_jsonl_lines(path):
        try:
            doc = json.loads(line)
            record = task_record_from_dict(doc)
        except (json.JSONDecodeError, PlanEvalError) as exc:
            raise SchemaError(f"{path}:{lineno}: {exc}") from exc
        if record.task_id in seen:
            raise DuplicateIdError(f"{path}:{lineno}: duplicate task_id {record.task_id!r}")
        seen.add(record.task_id)
        records.append(record)
    if not records:
        raise SchemaError(f"{path}: dataset file has no records")
    return records


def load_predictions(path: str | Path) -> dict[str, list[str]]:
    """Read a predictions JSONL file into {task_id: steps}.

    Rows carry at least ``task_id`` and ``steps``; extra bookkeeping
    fields such as call_count and truncated are ignored here.
    """
    predictions: dict[str, list[str]] = {}
    for lineno, line in _iter_jsonl_lines(path):
        try:
            doc = json.loads(line)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}:{lineno}: {exc}") from exc
        if not isinstance(doc, dict) or "task_id" not in doc or "steps" not in doc:
            raise SchemaError(f"{path}:{lineno}: prediction rows need task_id and steps")
        steps = doc["steps"]
        if not isinstance(steps, list) or not all(isinstance(s, str) for s in steps):
            raise SchemaError(f"{path}:{lineno}: steps must be a list of strings")
        task_id = str(doc["task_id"])
        if task_id in predictions:
            raise DuplicateIdError(f"{path}:{lineno}: duplicate task_id {task_id!r}")
        predictions[task_id] = steps
    if not predictions:
        raise SchemaError(f"{path}: predictions file has no rows")
    return predictions


@dataclass(frozen=True)
class Violation:
    lineno: int
    message: str


def validate_dataset_file(path: str | Path) -> list[Violation]:
    """Check every dataset line against the record and table invariants."""
    violations: list[Violation] = []
    seen: set[str] = set()
    for lineno, line in _iter_jsonl_lines(path):
        try:
            doc = json.loads(line)
        except json.JSONDecodeError as exc:
            violations.append(Violation(lineno, f"invalid JSON: {exc}"))
            continue
        try:
            record = task_record_from_dict(doc)
        except PlanEvalError as exc:
            violations.append(Violation(lineno, str(exc)))
            continue
        if record.task_id in seen:
            violations.append(Violation(lineno, f"duplicate task_id {record.task_id!r}"))
        seen.add(record.task_id)
    return violations


def _iter_jsonl_lines(path: str | Path) -> Iterable[tuple[int, str]]:
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if line.strip():
                yield lineno, line
