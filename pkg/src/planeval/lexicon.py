"""The action lexicon behind key-action extraction.

The lexicon is plain data: the verb surface forms that anchor action
phrases, a synonym map that unifies phrasings with the same behavior
("walk" and "go", "turn to the left" and "turn left"), the direction and
particle words that extend a verb, and the stopwords dropped from noun
arguments. Shipping it as a JSON file keeps the rule set auditable and
easy to extend.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from importlib import resources
from typing import Mapping

from .errors import CycleInSynonymsError, EmptyLexiconError, LexiconError

DEFAULT_LEXICON_RESOURCE = "lexicon.json"


@dataclass(frozen=True)
class ActionLexicon:
    """A validated lexicon; the synonym map is fully resolved (idempotent)."""

    verbs: frozenset[str]
    synonyms: Mapping[str, str]
    particles: frozenset[str]
    stopwords: frozenset[str]
    fingerprint: str

    def resolve(self, phrase: str) -> str:
        """Map a phrase to its canonical form; identity when unmapped."""
        return self.synonyms.get(phrase, phrase)

    def is_verb(self, token: str) -> bool:
        return token in self.verbs

    def keys_anchored_at(self, token: str) -> tuple[tuple[str, ...], ...]:
        """Synonym keys whose first token is ``token``, longest first."""
        return self._keys_by_anchor.get(token, ())

    @property
    def canonical_verb_heads(self) -> frozenset[str]:
        """First tokens of fully resolved verbs; canonical phrases start here."""
        return self._heads

    def __post_init__(self) -> None:
        by_anchor: dict[str, list[tuple[str, ...]]] = {}
        for key in self.synonyms:
            toks = tuple(key.split())
            by_anchor.setdefault(toks[0], []).append(toks)
        for anchor in by_anchor:
            by_anchor[anchor].sort(key=len, reverse=True)
        object.__setattr__(
            self, "_keys_by_anchor", {a: tuple(ks) for a, ks in by_anchor.items()}
        )
        heads = {self.resolve(v).split()[0] for v in self.verbs}
        heads.update(value.split()[0] for value in self.synonyms.values())
        object.__setattr__(self, "_heads", frozenset(heads))


def load_lexicon(document: Mapping) -> ActionLexicon:
    """Validate a lexicon document and resolve synonym chains.

    Chains (a -> b, b -> c) collapse to their endpoint at load time so
    the map is idempotent; a cycle is a hard error.
    """
    if not isinstance(document, Mapping):
        raise LexiconError("lexicon document must be a JSON object")
    unknown = set(document) - {"verbs", "synonyms", "particles", "stopwords"}
    if unknown:
        raise LexiconError(f"lexicon has unknown fields: {sorted(unknown)}")

    verbs = _string_list(document.get("verbs", []), "verbs")
    if not verbs:
        raise EmptyLexiconError("lexicon declares no verbs")
    particles = _string_list(document.get("particles", []), "particles")
    stopwords = _string_list(document.get("stopwords", []), "stopwords")

    raw_synonyms = document.get("synonyms", {})
    if not isinstance(raw_synonyms, Mapping):
        raise LexiconError("synonyms must be an object")
    for key, value in raw_synonyms.items():
        if not key or not str(key).strip():
            raise LexiconError("synonym keys must be non-empty")
        if not value or not str(value).strip():
            raise LexiconError(f"synonym value for {key!r} must be non-empty")

    resolved: dict[str, str] = {}
    for key in raw_synonyms:
        target = raw_synonyms[key]
        trail = {key}
        while target in raw_synonyms:
            if target in trail:
                raise CycleInSynonymsError(f"synonym cycle through {target!r}")
            trail.add(target)
            target = raw_synonyms[target]
        resolved[key] = target

    fingerprint = hashlib.sha256(
        json.dumps(
            {
                "verbs": sorted(verbs),
                "synonyms": dict(sorted(raw_synonyms.items())),
                "particles": sorted(particles),
                "stopwords": sorted(stopwords),
            },
            sort_keys=True,
        ).encode("utf-8")
    ).hexdigest()

    return ActionLexicon(
        verbs=frozenset(verbs),
        synonyms=resolved,
        particles=frozenset(particles),
        stopwords=frozenset(stopwords),
        fingerprint=fingerprint,
    )


def load_lexicon_file(path) -> ActionLexicon:
    with open(path, encoding="utf-8") as handle:
        return load_lexicon(json.load(handle))


def default_lexicon() -> ActionLexicon:
    """The lexicon shipped with the package (household task verbs)."""
    data = resources.files("planeval.data").joinpath(DEFAULT_LEXICON_RESOURCE)
    return load_lexicon(json.loads(data.read_text(encoding="utf-8")))


def _string_list(value, where: str) -> list[str]:
    if not isinstance(value, list) or not all(isinstance(v, str) and v for v in value):
        raise LexiconError(f"{where} must be a list of non-empty strings")
    return value
