"""Error and difficulty analyses over evaluation reports and datasets.

Covers the three standard post-hoc views: how far generated plan lengths
drift from the references (signed histogram), how metric quality moves
with reference plan length (buckets), and the corpus statistics of a
dataset file. For reference, the full ALFRED-derived train split
measures 21,025 tasks, avg goal length 9.26 tokens, avg 73.71 objects
per room, avg 6.72 steps per plan, and avg 11.24 tokens per step; those
magnitudes are a documentation target for full-data runs, not something
the shipped fixtures reproduce.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .aggregate import EvalReport
from .errors import EmptyBucketBoundariesError, EmptyDatasetError, EmptyInputError
from .plan import Plan, TaskRecord
from .text import token_count

# Rough thirds around the typical 6-7 step plan, plus a long tail.
DEFAULT_BUCKET_BOUNDARIES = (4, 7, 10)


@dataclass(frozen=True)
class LengthErrorHistogram:
    """Counts of (generated length - reference length), pre-alignment."""

    bins: Mapping[int, int]
    total: int
    exact_match_share: float


def length_error_histogram(pairs: Sequence[tuple[Plan, Plan]]) -> LengthErrorHistogram:
    """Histogram of signed plan-length errors; negative = underestimation."""
    return length_error_from_lengths([(len(g), len(r)) for g, r in pairs])


def length_error_from_lengths(lengths: Sequence[tuple[int, int]]) -> LengthErrorHistogram:
    if not lengths:
        raise EmptyInputError("length_error_histogram needs at least one pair")
    bins: dict[int, int] = {}
    for gen_len, ref_len in lengths:
        delta = gen_len - ref_len
        bins[delta] = bins.get(delta, 0) + 1
    total = len(lengths)
    return LengthErrorHistogram(
        bins=dict(sorted(bins.items())),
        total=total,
        exact_match_share=bins.get(0, 0) / total,
    )


@dataclass(frozen=True)
class LengthBucket:
    label: str
    lo: int | None  # inclusive; None = open
    hi: int | None  # exclusive; None = open
    count: int
    means: Mapping[str, float | None]


@dataclass(frozen=True)
class LengthBucketReport:
    boundaries: tuple[int, ...]
    buckets: tuple[LengthBucket, ...]


def bucket_by_length(
    report: EvalReport, boundaries: Sequence[int] = DEFAULT_BUCKET_BOUNDARIES
) -> LengthBucketReport:
    """Mean aggregated scores per reference-length bucket.

    Buckets are half-open: below the first boundary, [b_i, b_i+1), and
    at-or-above the last. Empty buckets report count 0 and null means.
    """
    bounds = tuple(boundaries)
    if not bounds:
        raise EmptyBucketBoundariesError("need at least one bucket boundary")
    if list(bounds) != sorted(set(bounds)):
        raise EmptyBucketBoundariesError(f"boundaries must be strictly increasing: {bounds}")

    edges: list[tuple[str, int | None, int | None]] = [(f"<{bounds[0]}", None, bounds[0])]
    for lo, hi in zip(bounds, bounds[1:]):
        edges.append((f"[{lo},{hi})", lo, hi))
    edges.append((f">={bounds[-1]}", bounds[-1], None))

    metrics = sorted(report.corpus_means)
    grouped: dict[str, list] = {label: [] for label, _, _ in edges}
    for task in report.tasks:
        for label, lo, hi in edges:
            if (lo is None or task.ref_length >= lo) and (hi is None or task.ref_length < hi):
                grouped[label].append(task)
                break

    buckets = []
    for label, lo, hi in edges:
        members = grouped[label]
        means: dict[str, float | None] = {}
        for metric in metrics:
            if members:
                means[metric] = sum(t.aggregates[metric] for t in members) / len(members)
            else:
                means[metric] = None
        buckets.append(LengthBucket(label, lo, hi, len(members), means))
    return LengthBucketReport(boundaries=bounds, buckets=tuple(buckets))


@dataclass(frozen=True)
class SplitStats:
    """Per-split dataset statistics, all under the shared tokenizer."""

    split: str
    task_count: int
    avg_goal_tokens: float
    avg_object_count: float | None
    env_missing_count: int
    avg_step_count: float
    avg_step_tokens: float


def dataset_stats(records: Sequence[TaskRecord]) -> dict[str, SplitStats]:
    """Statistics per split: goal length, objects per room, steps per plan.

    Tasks without an environment are excluded from the object average
    (the exclusion count is reported); the per-step token average pools
    steps across tasks rather than averaging per-task means.
    """
    if not records:
        raise EmptyDatasetError("dataset_stats needs at least one record")
    by_split: dict[str, list[TaskRecord]] = {}
    for record in records:
        by_split.setdefault(record.split, []).append(record)

    stats = {}
    for split in sorted(by_split):
        members = by_split[split]
        goal_tokens = [token_count(r.goal) for r in members]
        step_counts = [len(r.reference_plan) for r in members]
        step_tokens = [
            token_count(step) for r in members for step in r.reference_plan.steps
        ]
        with_env = [r for r in members if r.environment is not None]
        stats[split] = SplitStats(
            split=split,
            task_count=len(members),
            avg_goal_tokens=sum(goal_tokens) / len(members),
            avg_object_count=(
                sum(len(r.environment.rows) for r in with_env) / len(with_env)
                if with_env
                else None
            ),
            env_missing_count=len(members) - len(with_env),
            avg_step_count=sum(step_counts) / len(members),
            avg_step_tokens=sum(step_tokens) / len(step_tokens),
        )
    return stats
