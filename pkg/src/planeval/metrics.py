"""Step-wise n-gram metrics: sentence BLEU and CIDEr, single reference.

Both metrics share the toolkit tokenizer. CIDEr is the plain TF-IDF
cosine form (no length penalty): the IDF table is built once over the
evaluation's reference steps, one step per document, and a step pair is
scored by the cosine similarity of the TF-IDF vectors at orders 1..4,
averaged and scaled by 10.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Mapping, Protocol, runtime_checkable

from .errors import DomainError, EmptyCorpusError, PlanEvalError, StepScoringError
from .kas import kas_step
from .lexicon import ActionLexicon
from .plan import AlignedPair
from .text import ngrams, tokenize

MAX_NGRAM_ORDER = 4

# Epsilon for smoothing zero match counts at orders above 1; sentence
# BLEU on short steps is degenerate without it.
BLEU_EPSILON = 0.1


def bleu_step(gen: str, ref: str, max_n: int = MAX_NGRAM_ORDER) -> float:
    """Sentence-level BLEU of one generated step against one reference step.

    Geometric mean of modified n-gram precisions times the brevity
    penalty. Zero unigram overlap scores 0. Orders above 1 with zero
    matches are smoothed with an additive epsilon; orders for which the
    candidate is too short to have any n-grams are left out of the mean.
    """
    ref_tokens = tokenize(ref)
    if not ref_tokens:
        raise DomainError("bleu_step needs a non-empty reference step")
    gen_tokens = tokenize(gen)
    if not gen_tokens:
        return 0.0

    log_precisions = []
    for n in range(1, max_n + 1):
        gen_counts = Counter(ngrams(gen_tokens, n))
        total = sum(gen_counts.values())
        if total == 0:
            continue
        ref_counts = Counter(ngrams(ref_tokens, n))
        matches = sum(min(count, ref_counts[gram]) for gram, count in gen_counts.items())
        if matches == 0:
            if n == 1:
                return 0.0
            log_precisions.append(math.log(BLEU_EPSILON / total))
        else:
            log_precisions.append(math.log(matches / total))

    c, r = len(gen_tokens), len(ref_tokens)
    brevity = 1.0 if c > r else math.exp(1.0 - r / c)
    return brevity * math.exp(sum(log_precisions) / len(log_precisions))


@dataclass(frozen=True)
class IdfTable:
    """Document frequencies of reference-step n-grams (one step = one doc)."""

    df: Mapping[tuple[str, ...], int]
    total_docs: int
    max_n: int = MAX_NGRAM_ORDER

    def idf(self, gram: tuple[str, ...]) -> float:
        # Unseen n-grams get df clamped to 1.
        return math.log(self.total_docs / max(1, self.df.get(gram, 1)))


def build_idf(reference_steps: Iterable[str], max_n: int = MAX_NGRAM_ORDER) -> IdfTable:
    """Count, for every n-gram, how many reference steps contain it."""
    steps = list(reference_steps)
    if not steps:
        raise EmptyCorpusError("build_idf needs at least one reference step")
    df: Counter[tuple[str, ...]] = Counter()
    for step in steps:
        tokens = tokenize(step)
        present: set[tuple[str, ...]] = set()
        for n in range(1, max_n + 1):
            present.update(ngrams(tokens, n))
        df.update(present)
    return IdfTable(dict(df), total_docs=len(steps), max_n=max_n)


def cider_step(gen: str, ref: str, idf: IdfTable) -> float:
    """CIDEr of one step pair: mean TF-IDF cosine over orders 1..max_n, x10."""
    gen_tokens = tokenize(gen)
    ref_tokens = tokenize(ref)
    similarities = []
    for n in range(1, idf.max_n + 1):
        gen_vec = _tfidf_vector(gen_tokens, n, idf)
        ref_vec = _tfidf_vector(ref_tokens, n, idf)
        similarities.append(_cosine(gen_vec, ref_vec))
    return 10.0 * sum(similarities) / len(similarities)


def _tfidf_vector(tokens: list[str], n: int, idf: IdfTable) -> dict[tuple[str, ...], float]:
    counts = Counter(ngrams(tokens, n))
    return {gram: count * idf.idf(gram) for gram, count in counts.items()}


def _cosine(a: dict, b: dict) -> float:
    norm_a = math.sqrt(sum(v * v for v in a.values()))
    norm_b = math.sqrt(sum(v * v for v in b.values()))
    if norm_a == 0.0 or norm_b == 0.0:
        return 0.0
    dot = sum(v * b[g] for g, v in a.items() if g in b)
    return dot / (norm_a * norm_b)


# --- the pluggable step-scorer surface ------------------------------------


@runtime_checkable
class StepScorer(Protocol):
    """Anything that can score one aligned step pair deterministically."""

    name: str

    def score(self, gen_step: str, ref_step: str) -> float: ...


class BleuStepScorer:
    def __init__(self, max_n: int = MAX_NGRAM_ORDER):
        self.name = "bleu"
        self.max_n = max_n

    def score(self, gen_step: str, ref_step: str) -> float:
        return bleu_step(gen_step, ref_step, self.max_n)


class CiderStepScorer:
    def __init__(self, idf: IdfTable):
        self.name = "cider"
        self.idf = idf

    def score(self, gen_step: str, ref_step: str) -> float:
        return cider_step(gen_step, ref_step, self.idf)


class KasStepScorer:
    def __init__(self, lexicon: ActionLexicon):
        self.name = "kas"
        self.lexicon = lexicon

    def score(self, gen_step: str, ref_step: str) -> float:
        return kas_step(gen_step, ref_step, self.lexicon).value


def score_plan(pair: AlignedPair, scorer: StepScorer) -> list[float]:
    """Apply a step scorer across an aligned pair, step by step."""
    scores = []
    for i, (gen, ref) in enumerate(zip(pair.generated.steps, pair.reference.steps), start=1):
        try:
            scores.append(scorer.score(gen, ref))
        except PlanEvalError as exc:
            raise StepScoringError(f"{scorer.name} failed at step {i}: {exc}") from exc
    return scores
