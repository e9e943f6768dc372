"""Template-scoped ambiguity detection (the inverse of instantiation)."""

from __future__ import annotations

import re
from dataclasses import dataclass

from .lexicon import Lexicon
from .templates import Template, TemplateError, all_templates, build_regex, extract_bindings, normalize_bindings


@dataclass(frozen=True)
class DetectResult:
    ambiguity_type: str
    template_id: str
    bindings: dict


# Regexes are pure functions of (template, lexicon); keyed by lexicon identity.
_REGEX_CACHE: dict[tuple[str, int], re.Pattern] = {}


def _regex_for(template: Template, lexicon: Lexicon) -> re.Pattern:
    key = (template.id, id(lexicon))
    regex = _REGEX_CACHE.get(key)
    if regex is None:
        regex = build_regex(template, lexicon)
        _REGEX_CACHE[key] = regex
    return regex


def _match_templates(sentence: str, lexicon: Lexicon) -> DetectResult | None:
    for template in all_templates():
        m = _regex_for(template, lexicon).match(sentence)
        if m is None:
            continue
        bindings = extract_bindings(template, m, lexicon)
        try:
            normalize_bindings(template, bindings, lexicon)
        except TemplateError:
            continue  # surface matched but a cross-slot constraint failed
        return DetectResult(template.ambiguity_type, template.id, bindings)
    return None


def strip_decoration(sentence: str, lexicon: Lexicon) -> str | None:
    """Remove one trailing decoration clause; None when nothing was stripped."""
    for decoration in lexicon.decorations:
        for suffix, tail in ((" " + decoration + ".", "."), (" " + decoration, "")):
            if sentence.endswith(suffix):
                return sentence[: -len(suffix)] + tail
    return None


def detect_ambiguity(sentence: str, lexicon: Lexicon) -> DetectResult | None:
    """Identify the template behind a sentence, or None for no match.

    Decoration clauses appended by complexification sit outside the matched
    span and are stripped before re-trying the template scan.
    """
    sentence = re.sub(r"\s+", " ", sentence.strip())
    if not sentence:
        return None
    result = _match_templates(sentence, lexicon)
    if result is not None:
        return result
    stripped = strip_decoration(sentence, lexicon)
    if stripped is not None:
        return _match_templates(stripped, lexicon)
    return None
