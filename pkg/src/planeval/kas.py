"""Key Action Score: extract key action phrases, fuzzy-match them.

A step is split into clauses; in each clause the leftmost lexicon verb
anchors one action phrase. The verb plus any trailing direction words is
pushed through the synonym map so "turn to the left" and "turn left"
come out identical. Arguments are the noun spans after the verb and
after each preposition, with stopwords dropped.

Matching is precision over the generated phrases: each one takes the
best score it can get against any reference phrase. Verbs must agree
exactly (post-canonicalization); arguments earn partial credit by token
overlap so "table" still gets half credit against "coffee table".
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .lexicon import ActionLexicon
from .plan import AlignedPair
from .text import tokenize

# Span delimiters are a fixed rule rather than lexicon data: they mark
# where one argument ends and the next begins.
PREPOSITIONS = frozenset(
    {
        "to", "from", "on", "in", "into", "onto", "at", "with", "by", "near",
        "under", "underneath", "over", "above", "below", "behind", "beside",
        "between", "inside", "outside", "across", "along", "through",
        "toward", "towards", "against", "of", "off", "out", "for", "until",
        "upon", "atop",
    }
)

_CLAUSE_PUNCT = re.compile(r"[,.;:!?|]+")
_CLAUSE_WORDS = frozenset({"and", "then"})


@dataclass(frozen=True)
class ActionPhrase:
    """A canonicalized verb with its argument token lists."""

    canonical_verb: str
    arguments: tuple[tuple[str, ...], ...]
    raw_span: str

    def __str__(self) -> str:
        args = "; ".join(" ".join(a) for a in self.arguments)
        return f"{self.canonical_verb}({args})"


@dataclass(frozen=True)
class StepScore:
    """Per-step KAS value plus the matches behind it."""

    value: float
    matched: tuple[tuple[ActionPhrase, ActionPhrase, float], ...] = ()
    unmatched: tuple[ActionPhrase, ...] = ()


def extract_key_actions(step: str, lexicon: ActionLexicon) -> list[ActionPhrase]:
    """Extract the key action phrases of one step text.

    Clauses split on sentence punctuation, the plan separator, and the
    words "and"/"then". A clause without a lexicon verb yields nothing.
    """
    phrases = []
    for segment in _CLAUSE_PUNCT.split(step.lower()):
        tokens = tokenize(segment)
        for clause in _split_on_words(tokens, _CLAUSE_WORDS):
            phrase = _extract_from_clause(clause, lexicon)
            if phrase is not None:
                phrases.append(phrase)
    return phrases


def _split_on_words(tokens: list[str], boundary: frozenset[str]) -> list[list[str]]:
    clauses: list[list[str]] = [[]]
    for tok in tokens:
        if tok in boundary:
            clauses.append([])
        else:
            clauses[-1].append(tok)
    return [c for c in clauses if c]


def _extract_from_clause(tokens: list[str], lexicon: ActionLexicon) -> ActionPhrase | None:
    anchor = next((i for i, t in enumerate(tokens) if lexicon.is_verb(t)), None)
    if anchor is None:
        return None
    verb, rest_at = _resolve_verb_phrase(tokens, anchor, lexicon)
    arguments = _argument_spans(tokens[rest_at:], lexicon)
    return ActionPhrase(verb, tuple(arguments), " ".join(tokens))


def _resolve_verb_phrase(tokens: list[str], anchor: int, lexicon: ActionLexicon) -> tuple[str, int]:
    """Canonicalize the verb (plus particles) starting at ``anchor``.

    Longest synonym key anchored at the verb wins first (this is what
    absorbs phrasings like "turn to the left"); trailing particles are
    then folded in, and the assembled phrase is resolved once more so
    compositions like walk + left reach "turn left".
    """
    replacement = [tokens[anchor]]
    consumed = 1
    for key in lexicon.keys_anchored_at(tokens[anchor]):
        if tuple(tokens[anchor : anchor + len(key)]) == key:
            replacement = lexicon.resolve(" ".join(key)).split()
            consumed = len(key)
            break
    j = anchor + consumed
    while j < len(tokens) and tokens[j] in lexicon.particles:
        replacement.append(tokens[j])
        j += 1
    return lexicon.resolve(" ".join(replacement)), j


def _argument_spans(tokens: list[str], lexicon: ActionLexicon) -> list[tuple[str, ...]]:
    """Noun spans: delimited by prepositions and particles, stopwords dropped.

    A verb token ends argument collection when it starts a fresh span
    (it begins another action); inside a span it reads as a noun
    ("the brown set of drawers").
    """
    spans: list[tuple[str, ...]] = []
    current: list[str] = []

    def close() -> None:
        content = tuple(t for t in current if t not in lexicon.stopwords)
        if content:
            spans.append(content)

    for tok in tokens:
        if lexicon.is_verb(tok) and not current:
            break
        if tok in PREPOSITIONS or tok in lexicon.particles:
            close()
            current = []
            continue
        current.append(tok)
    close()
    return spans


def phrase_match_score(gen: ActionPhrase, ref: ActionPhrase) -> float:
    """Similarity of one generated phrase to one reference phrase, in [0, 1].

    Zero unless the canonical verbs agree. A reference phrase without
    arguments is fully matched by the verb alone; otherwise each
    reference argument takes its best credit over the generated
    arguments and the credits are averaged.
    """
    if gen.canonical_verb != ref.canonical_verb:
        return 0.0
    if not ref.arguments:
        return 1.0
    credits = []
    for r_arg in ref.arguments:
        best = 0.0
        for g_arg in gen.arguments:
            best = max(best, _argument_credit(g_arg, r_arg))
        credits.append(best)
    return sum(credits) / len(credits)


def _argument_credit(g_arg: tuple[str, ...], r_arg: tuple[str, ...]) -> float:
    # Compound nouns earn partial credit by token overlap, but only when
    # the head noun (last token) of one side appears in the other.
    g_set, r_set = set(g_arg), set(r_arg)
    if r_arg[-1] not in g_set and g_arg[-1] not in r_set:
        return 0.0
    return len(g_set & r_set) / len(r_arg)


def kas_step(gen_step: str, ref_step: str, lexicon: ActionLexicon) -> StepScore:
    """KAS for one aligned step pair: precision over generated phrases.

    An empty generated phrase set scores 0 against a non-empty reference
    set and 1 when the reference set is empty too, so vacuous steps can
    never inflate the metric.
    """
    gen_phrases = extract_key_actions(gen_step, lexicon)
    ref_phrases = extract_key_actions(ref_step, lexicon)
    if not gen_phrases:
        return StepScore(1.0 if not ref_phrases else 0.0)

    matched = []
    unmatched = []
    best_scores = []
    for g in gen_phrases:
        best, best_ref = 0.0, None
        for r in ref_phrases:
            score = phrase_match_score(g, r)
            if score > best:
                best, best_ref = score, r
        best_scores.append(best)
        if best_ref is not None:
            matched.append((g, best_ref, best))
        else:
            unmatched.append(g)
    value = sum(best_scores) / len(best_scores)
    return StepScore(value, tuple(matched), tuple(unmatched))


def kas_plan(pair: AlignedPair, lexicon: ActionLexicon) -> list[StepScore]:
    """Step-wise KAS over an aligned pair; one StepScore per reference step."""
    return [
        kas_step(gen, ref, lexicon)
        for gen, ref in zip(pair.generated.steps, pair.reference.steps)
    ]
