"""Word lists and capability facts that drive prompt generation and detection."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

log = logging.getLogger(__name__)

REQUIRED_CATEGORIES = (
    "person_nouns",
    "animal_nouns",
    "object_nouns",
    "adjectives",
    "transitive_verbs",
    "prepositions",
    "activities",
    "occupations",
    "decorations",
)

# Optional categories get these defaults when a document omits them.
_OPTIONAL_DEFAULTS = {
    "materials": ["porcelain", "wooden", "plastic"],
    "misc_pairs": [["egg", "container"]],
    "capabilities": {},
}


class LexiconError(ValueError):
    """Raised when a lexicon document is malformed or incomplete."""


@dataclass(frozen=True)
class Verb:
    """A transitive verb with the two inflections the templates render."""

    base: str
    third: str
    part: str


@dataclass(frozen=True)
class Lexicon:
    person_nouns: tuple[str, ...]
    animal_nouns: tuple[str, ...]
    object_nouns: tuple[str, ...]
    adjectives: tuple[str, ...]
    transitive_verbs: tuple[Verb, ...]
    prepositions: tuple[str, ...]
    activities: tuple[str, ...]
    occupations: tuple[str, ...]
    decorations: tuple[str, ...]
    materials: tuple[str, ...]
    misc_pairs: tuple[tuple[str, str], ...]
    capabilities: dict = field(default_factory=dict)

    def creatures(self) -> tuple[str, ...]:
        return self.person_nouns + self.animal_nouns

    def things(self) -> tuple[str, ...]:
        return self.object_nouns + self.animal_nouns

    def simple_activities(self) -> tuple[str, ...]:
        """Single-token activities, usable as a bare gerund after a noun pair."""
        return tuple(a for a in self.activities if " " not in a)

    def verb_by_base(self, base: str) -> Verb:
        try:
            return self._base_index()[base]
        except KeyError:
            raise LexiconError(f"unknown verb: {base!r}") from None

    def verb_base_for(self, surface: str) -> str | None:
        """Map any inflected form (or the base itself) back to its base form."""
        return self._surface_index().get(surface)

    def can_do(self, noun: str, activity: str) -> bool | None:
        """Capability fact for (noun, activity); None when the lexicon is silent."""
        facts = self.capabilities.get(noun)
        if facts is None:
            return None
        return facts.get(activity)

    # Index caches live outside the frozen dataclass fields.
    def _base_index(self) -> dict[str, Verb]:
        cache = self.__dict__.get("_bases")
        if cache is None:
            cache = {v.base: v for v in self.transitive_verbs}
            object.__setattr__(self, "_bases", cache)
        return cache

    def _surface_index(self) -> dict[str, str]:
        cache = self.__dict__.get("_surfaces")
        if cache is None:
            cache = {}
            for v in self.transitive_verbs:
                cache[v.base] = v.base
                cache[v.third] = v.base
                cache[v.part] = v.base
            object.__setattr__(self, "_surfaces", cache)
        return cache


def _clean_entries(category: str, entries: list) -> list:
    if not isinstance(entries, list):
        raise LexiconError(f"category {category!r} must be an array")
    cleaned, seen = [], set()
    for entry in entries:
        key = json.dumps(entry, sort_keys=True) if not isinstance(entry, str) else entry
        if key in seen:
            log.warning("lexicon: duplicate %r in %s, dropping", entry, category)
            continue
        seen.add(key)
        cleaned.append(entry)
    if not cleaned:
        raise LexiconError(f"category {category!r} is empty")
    return cleaned


def _check_token(category: str, token: str) -> str:
    if not isinstance(token, str) or not token:
        raise LexiconError(f"category {category!r} has a non-text entry: {token!r}")
    if token != token.strip():
        raise LexiconError(f"entry {token!r} in {category!r} has surrounding whitespace")
    if token != token.lower():
        raise LexiconError(f"entry {token!r} in {category!r} must be lowercase")
    return token


def lexicon_from_dict(doc: dict) -> Lexicon:
    if not isinstance(doc, dict):
        raise LexiconError("lexicon document must be an object")
    for category in REQUIRED_CATEGORIES:
        if category not in doc:
            raise LexiconError(f"missing required category: {category!r}")

    fields: dict = {}
    for category in REQUIRED_CATEGORIES:
        entries = _clean_entries(category, doc[category])
        if category == "transitive_verbs":
            verbs = []
            for entry in entries:
                if not isinstance(entry, dict) or not all(k in entry for k in ("base", "third", "part")):
                    raise LexiconError(
                        f"verb entry {entry!r} must carry base, third and part forms"
                    )
                verbs.append(
                    Verb(
                        _check_token(category, entry["base"]),
                        _check_token(category, entry["third"]),
                        _check_token(category, entry["part"]),
                    )
                )
            fields[category] = tuple(verbs)
        else:
            fields[category] = tuple(_check_token(category, e) for e in entries)

    materials = doc.get("materials", _OPTIONAL_DEFAULTS["materials"])
    fields["materials"] = tuple(_check_token("materials", m) for m in _clean_entries("materials", materials))
    pairs = doc.get("misc_pairs", _OPTIONAL_DEFAULTS["misc_pairs"])
    fields["misc_pairs"] = tuple(
        (_check_token("misc_pairs", p[0]), _check_token("misc_pairs", p[1]))
        for p in _clean_entries("misc_pairs", pairs)
    )
    fields["capabilities"] = dict(doc.get("capabilities", {}))
    return Lexicon(**fields)


def load_lexicon(path: str | Path) -> Lexicon:
    """Load and validate a lexicon document from a JSON file."""
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise LexiconError(f"malformed lexicon document {path}: {exc}") from exc
    return lexicon_from_dict(doc)


def default_lexicon_path() -> Path:
    return Path(str(resources.files("promptlens").joinpath("data/lexicon.json")))


def default_lexicon() -> Lexicon:
    """The lexicon shipped with the package."""
    return load_lexicon(default_lexicon_path())
