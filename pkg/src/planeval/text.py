"""The single shared tokenizer.

Every metric (KAS arguments, BLEU, CIDEr) and every token statistic in
reports uses this tokenization, so scores stay comparable. Reports echo
TOKENIZER_ID so an artifact always names the tokenizer that produced it.
"""

from __future__ import annotations

import re

TOKENIZER_ID = "lowercase-nopunct-whitespace-v1"

_PUNCT = re.compile(r"[^\w\s]+")


def tokenize(text: str) -> list[str]:
    """Lowercase, replace punctuation with spaces, split on whitespace."""
    return _PUNCT.sub(" ", text.lower()).split()


def token_count(text: str) -> int:
    return len(tokenize(text))


def ngrams(tokens: list[str], n: int) -> list[tuple[str, ...]]:
    """All order-n n-grams of a token list, in order; empty when too short."""
    return [tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1)]
