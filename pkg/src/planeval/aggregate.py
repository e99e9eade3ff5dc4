"""Temporal reweighting and score aggregation into reports.

Step t of a T-step plan gets raw weight p*(1-p)^(t-1), renormalized over
the T steps, so earlier steps count more as p grows. The p=0 and p=1
endpoints are the uniform and first-step-only special cases. A corpus
score is the plain mean of per-task aggregates (macro average).
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import (
    DomainError,
    EmptyCorpusError,
    LengthMismatchError,
    SchemaError,
)

_WEIGHT_SUM_TOL = 1e-9
_REPORT_MEAN_TOL = 1e-9


def geometric_weights(T: int, p: float) -> list[float]:
    """Normalized geometric step weights for a T-step plan.

    p=0 gives every step the same weight; p=1 puts all weight on the
    first step; in between, weights decay geometrically and are
    renormalized to sum to 1 over the finite plan.
    """
    if T < 1:
        raise DomainError(f"T must be >= 1, got {T}")
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"p must be in [0, 1], got {p}")
    if p == 0.0:
        return [1.0 / T] * T
    if p == 1.0:
        return [1.0] + [0.0] * (T - 1)
    raw = [p * (1.0 - p) ** t for t in range(T)]
    total = sum(raw)
    return [w / total for w in raw]


def aggregate_plan(step_scores: Sequence[float], weights: Sequence[float]) -> float:
    """Weighted aggregate of per-step scores: a dot product."""
    if len(step_scores) != len(weights):
        raise LengthMismatchError(
            f"{len(step_scores)} scores vs {len(weights)} weights"
        )
    if abs(sum(weights) - 1.0) > _WEIGHT_SUM_TOL:
        raise DomainError(f"weights must sum to 1, got {sum(weights)!r}")
    return sum(s * w for s, w in zip(step_scores, weights))


@dataclass(frozen=True)
class CorpusSummary:
    mean: float
    count: int


def aggregate_corpus(per_task: Sequence[float]) -> CorpusSummary:
    """Macro average over tasks: every task weighs the same."""
    if not per_task:
        raise EmptyCorpusError("aggregate_corpus needs at least one task score")
    return CorpusSummary(mean=sum(per_task) / len(per_task), count=len(per_task))


# --- reports ---------------------------------------------------------------


@dataclass(frozen=True)
class TaskResult:
    """Per-task metric results; lengths are pre-alignment."""

    task_id: str
    gen_length: int
    ref_length: int
    step_scores: Mapping[str, tuple[float, ...]]
    aggregates: Mapping[str, float]


@dataclass(frozen=True)
class EvalReport:
    """Per-task and corpus-level results plus the config that made them."""

    config: Mapping[str, object]
    tasks: tuple[TaskResult, ...]
    corpus_means: Mapping[str, float] = field(default_factory=dict)

    @property
    def task_count(self) -> int:
        return len(self.tasks)

    def to_dict(self) -> dict:
        return {
            "config": dict(self.config),
            "corpus": {
                "task_count": self.task_count,
                "means": dict(self.corpus_means),
            },
            "tasks": [
                {
                    "task_id": t.task_id,
                    "gen_length": t.gen_length,
                    "ref_length": t.ref_length,
                    "step_scores": {m: list(v) for m, v in t.step_scores.items()},
                    "aggregates": dict(t.aggregates),
                }
                for t in self.tasks
            ],
        }

    @classmethod
    def from_dict(cls, doc: Mapping) -> "EvalReport":
        try:
            tasks = tuple(
                TaskResult(
                    task_id=t["task_id"],
                    gen_length=int(t["gen_length"]),
                    ref_length=int(t["ref_length"]),
                    step_scores={m: tuple(v) for m, v in t["step_scores"].items()},
                    aggregates=dict(t["aggregates"]),
                )
                for t in doc["tasks"]
            )
            report = cls(
                config=dict(doc["config"]),
                tasks=tasks,
                corpus_means=dict(doc["corpus"]["means"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"malformed report document: {exc}") from exc
        _check_report(report)
        return report

    def write_json(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )

    def write_csv(self, path: str | Path) -> None:
        """One row per task per metric."""
        with open(path, "w", encoding="utf-8", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(["task_id", "metric", "score", "gen_length", "ref_length"])
            for task in self.tasks:
                for metric in sorted(task.aggregates):
                    writer.writerow(
                        [
                            task.task_id,
                            metric,
                            repr(task.aggregates[metric]),
                            task.gen_length,
                            task.ref_length,
                        ]
                    )


def build_report(results: Iterable[TaskResult], config: Mapping[str, object]) -> EvalReport:
    """Assemble a report: tasks sorted by task_id, corpus means computed.

    Sorting here is what keeps parallel evaluation byte-deterministic:
    completion order never reaches the artifact.
    """
    tasks = tuple(sorted(results, key=lambda t: t.task_id))
    if not tasks:
        raise EmptyCorpusError("a report needs at least one task result")
    metrics = set(tasks[0].aggregates)
    for task in tasks:
        if set(task.aggregates) != metrics or set(task.step_scores) != metrics:
            raise SchemaError(f"task {task.task_id} is missing configured metrics")
    means = {
        m: aggregate_corpus([t.aggregates[m] for t in tasks]).mean for m in sorted(metrics)
    }
    return EvalReport(config=dict(config), tasks=tasks, corpus_means=means)


def _check_report(report: EvalReport) -> None:
    for metric, mean in report.corpus_means.items():
        recomputed = sum(t.aggregates[metric] for t in report.tasks) / len(report.tasks)
        if abs(recomputed - mean) > _REPORT_MEAN_TOL:
            raise SchemaError(
                f"corpus mean for {metric} is {mean}, tasks say {recomputed}"
            )
