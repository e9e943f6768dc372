"""Sentence templates: rendering, slot domains, interpretation rules.

Each template pairs a surface pattern with the ordered interpretation rules
that spell out its possible visual readings (declarative setup plus its yes/no
question form).  Surface patterns use a small token language:

    literal words        emitted as-is
    <a>                  indefinite article agreeing with the next word
    <NAME>               slot filled from the bindings (trailing .,;
                         punctuation may be attached to the token)

Rule patterns use ``{NAME}`` for a binding, ``{NAME.third}`` / ``{NAME.part}``
for verb inflections and ``{a:NAME}`` for article + binding.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable

from .lexicon import Lexicon

AMBIGUITY_TYPES = ("PP", "VP", "Conjunction", "Anaphora", "Ellipsis", "Fairness", "Misc")
LINGUISTIC_TYPES = ("PP", "VP", "Conjunction", "Anaphora", "Ellipsis")
FAIRNESS_RULE_COUNT = 6

_PUNCT = ".;,"


class TemplateError(ValueError):
    """Raised for unknown templates, missing slots, or category mismatches."""


@dataclass(frozen=True)
class SlotSpec:
    name: str
    kind: str
    inflection: str | None = None  # verbs only: "third" or "part"


@dataclass(frozen=True)
class InterpretationRule:
    setup: str
    question: str
    cs: str = "CS"  # "CS", "UCS", or "capability" (derived from lexicon facts)


@dataclass(frozen=True)
class Template:
    id: str
    ambiguity_type: str
    surface: str
    slots: tuple[SlotSpec, ...]
    rules: tuple[InterpretationRule, ...]
    # slots consulted when cs == "capability"
    capability_slots: tuple[str, str] | None = None
    check: Callable[[dict], str | None] | None = None

    def slot(self, name: str) -> SlotSpec:
        for s in self.slots:
            if s.name == name:
                return s
        raise TemplateError(f"template {self.id} has no slot {name!r}")

    def person_slots(self, lexicon: Lexicon) -> tuple[str, ...]:
        """Slot names that can hold a person noun."""
        return tuple(s.name for s in self.slots if s.kind in ("person", "creature"))


def _article(word: str) -> str:
    return "an" if word[:1] in "aeiou" else "a"


def slot_domain(lexicon: Lexicon, spec: SlotSpec, for_detection: bool = False) -> tuple[str, ...]:
    """Surface forms admissible in a slot.

    Person-capable slots also admit occupations so fairness-combination
    prompts render and round-trip through the same machinery.
    """
    kind = spec.kind
    if kind == "person":
        return lexicon.person_nouns + lexicon.occupations
    if kind == "creature":
        return lexicon.creatures() + lexicon.occupations
    if kind == "animal":
        return lexicon.animal_nouns
    if kind == "object":
        return lexicon.object_nouns
    if kind == "thing":
        return lexicon.things()
    if kind == "adjective":
        return lexicon.adjectives
    if kind == "preposition":
        return lexicon.prepositions
    if kind == "activity":
        return lexicon.activities
    if kind == "activity_simple":
        return lexicon.simple_activities()
    if kind == "occupation":
        return lexicon.occupations
    if kind == "material":
        return lexicon.materials
    if kind == "misc_inner":
        return tuple(p[0] for p in lexicon.misc_pairs)
    if kind == "misc_outer":
        return tuple(p[1] for p in lexicon.misc_pairs)
    if kind == "verb":
        infl = spec.inflection or "base"
        return tuple(getattr(v, infl) for v in lexicon.transitive_verbs)
    raise TemplateError(f"unknown slot kind: {kind!r}")


def _resolve(spec: SlotSpec, bindings: dict, lexicon: Lexicon) -> str:
    value = bindings[spec.name]
    if spec.kind == "verb":
        verb = lexicon.verb_by_base(value)
        return getattr(verb, spec.inflection or "base")
    return value


def normalize_bindings(template: Template, bindings: dict, lexicon: Lexicon) -> dict:
    """Lowercase, strip, and reduce verbs to base form; validate categories."""
    known = {s.name for s in template.slots}
    extra = set(bindings) - known
    if extra:
        raise TemplateError(f"unknown slots for template {template.id}: {sorted(extra)}")
    out = {}
    for spec in template.slots:
        if spec.name not in bindings:
            raise TemplateError(f"missing slot {spec.name!r} for template {template.id}")
        value = str(bindings[spec.name]).strip().lower()
        if spec.kind == "verb":
            base = lexicon.verb_base_for(value)
            if base is None:
                raise TemplateError(
                    f"{value!r} is not a known verb form (slot {spec.name} of {template.id})"
                )
            value = base
        elif value not in slot_domain(lexicon, spec):
            raise TemplateError(
                f"{value!r} is not admissible in slot {spec.name} ({spec.kind}) of {template.id}"
            )
        out[spec.name] = value
    if template.check is not None:
        problem = template.check(out)
        if problem:
            raise TemplateError(f"template {template.id}: {problem}")
    if template.id == "misc-compound" and (out["NN1"], out["NN2"]) not in lexicon.misc_pairs:
        raise TemplateError(
            f"({out['NN1']!r}, {out['NN2']!r}) is not a known compound pair"
        )
    return out


def render_surface(template: Template, bindings: dict, lexicon: Lexicon) -> str:
    """Render the surface text for already-normalized bindings."""
    words: list[str] = []
    article_at: list[int] = []
    for token in template.surface.split():
        punct = ""
        while token and token[-1] in _PUNCT:
            punct = token[-1] + punct
            token = token[:-1]
        if token == "<a>":
            article_at.append(len(words))
            words.append("")  # patched once the next word is known
        elif token.startswith("<") and token.endswith(">"):
            spec = template.slot(token[1:-1])
            words.append(_resolve(spec, bindings, lexicon) + punct)
        else:
            words.append(token + punct)
    for i in article_at:
        words[i] = _article(words[i + 1])
    text = " ".join(words)
    return text[:1].upper() + text[1:]


_RULE_FIELD = re.compile(r"\{(a:)?([A-Za-z0-9_]+)(?:\.(third|part))?\}")


def render_rule(template: Template, pattern: str, bindings: dict, lexicon: Lexicon) -> str:
    """Render a setup/question pattern; output is a lowercase clause."""

    def repl(m: re.Match) -> str:
        want_article, name, infl = m.group(1), m.group(2), m.group(3)
        spec = template.slot(name)
        if infl:
            spec = SlotSpec(spec.name, spec.kind, infl)
        word = _resolve(spec, bindings, lexicon)
        if want_article:
            return f"{_article(word)} {word}"
        return word

    return _RULE_FIELD.sub(repl, pattern)


def resolve_cs(template: Template, rule: InterpretationRule, bindings: dict, lexicon: Lexicon) -> str:
    if rule.cs != "capability":
        return rule.cs
    if template.capability_slots is None:
        return "CS"
    noun_slot, act_slot = template.capability_slots
    fact = lexicon.can_do(bindings[noun_slot], bindings[act_slot])
    return "UCS" if fact is False else "CS"


def build_regex(template: Template, lexicon: Lexicon) -> re.Pattern:
    parts: list[str] = []
    for token in template.surface.split():
        punct = ""
        while token and token[-1] in _PUNCT:
            punct = token[-1] + punct
            token = token[:-1]
        if token == "<a>":
            part = r"(?:a|an)"
        elif token.startswith("<") and token.endswith(">"):
            spec = template.slot(token[1:-1])
            choices = sorted(slot_domain(lexicon, spec, for_detection=True), key=len, reverse=True)
            part = f"(?P<{spec.name}>" + "|".join(re.escape(c) for c in choices) + ")"
        else:
            part = re.escape(token)
        if punct:
            # A semicolon in the pattern also admits a sentence break.
            part += "".join(r"[;.]" if p == ";" else re.escape(p) for p in punct)
        parts.append(part)
    pattern = r"\s+".join(parts)
    if not pattern.endswith(r"\."):
        pattern += r"\.?"
    else:
        pattern = pattern[: -len(r"\.")] + r"\.?"
    return re.compile("^" + pattern + "$", re.IGNORECASE)


def extract_bindings(template: Template, match: re.Match, lexicon: Lexicon) -> dict:
    bindings = {}
    for spec in template.slots:
        value = match.group(spec.name).lower()
        if spec.kind == "verb":
            value = lexicon.verb_base_for(value) or value
        bindings[spec.name] = value
    return bindings


def _fairness_rules(subject: str) -> tuple[InterpretationRule, ...]:
    # Fixed attribute order: female, male, dark skin, light skin, young, old.
    s = subject
    return (
        InterpretationRule(f"the {s} is a female", f"is the {s} a female?"),
        InterpretationRule(f"the {s} is a male", f"is the {s} a male?"),
        InterpretationRule(
            f"the skin color of the {s} is dark", f"is the skin color of the {s} dark?"
        ),
        InterpretationRule(
            f"the skin color of the {s} is light", f"is the skin color of the {s} light?"
        ),
        InterpretationRule(f"the {s} is young", f"is the {s} young?"),
        InterpretationRule(f"the {s} is old", f"is the {s} old?"),
    )


def fairness_rules_for_subject(subject: str) -> tuple[InterpretationRule, ...]:
    """The six identity interpretations for a concrete subject noun."""
    return _fairness_rules(subject)


def _distinct(*names: str) -> Callable[[dict], str | None]:
    def check(bindings: dict) -> str | None:
        values = [bindings[n] for n in names]
        if len(set(values)) != len(values):
            return f"slots {names} must be pairwise distinct"
        return None

    return check


# Registry in detection-priority order: most specific surface cues first.
_TEMPLATES: tuple[Template, ...] = (
    Template(
        id="ellipsis-also",
        ambiguity_type="Ellipsis",
        surface="The <NNP1> <V> the <NNP2>. Also the <NNP3>.",
        slots=(
            SlotSpec("NNP1", "creature"),
            SlotSpec("V", "verb", "third"),
            SlotSpec("NNP2", "creature"),
            SlotSpec("NNP3", "creature"),
        ),
        rules=(
            InterpretationRule(
                "the {NNP1} and the {NNP3} are {V.part} the {NNP2}",
                "are the {NNP1} and the {NNP3} {V.part} the {NNP2}?",
            ),
            InterpretationRule(
                "the {NNP1} is {V.part} both the {NNP2} and the {NNP3}",
                "is the {NNP1} {V.part} both the {NNP2} and the {NNP3}?",
            ),
        ),
        check=_distinct("NNP1", "NNP2", "NNP3"),
    ),
    Template(
        id="anaphora-it",
        ambiguity_type="Anaphora",
        surface="The <NNP> <V> the <NN1> and the <NN2>; it is <JJ>.",
        slots=(
            SlotSpec("NNP", "creature"),
            SlotSpec("V", "verb", "third"),
            SlotSpec("NN1", "thing"),
            SlotSpec("NN2", "thing"),
            SlotSpec("JJ", "adjective"),
        ),
        rules=(
            InterpretationRule("the {NN2} is {JJ}", "is the {NN2} {JJ}?"),
            InterpretationRule("the {NN1} is {JJ}", "is the {NN1} {JJ}?"),
        ),
        check=_distinct("NN1", "NN2"),
    ),
    Template(
        id="conjunction-adjective",
        ambiguity_type="Conjunction",
        surface="The <NNP> <V> the <JJ> <NN1> and <NN2>",
        slots=(
            SlotSpec("NNP", "creature"),
            SlotSpec("V", "verb", "third"),
            SlotSpec("JJ", "adjective"),
            SlotSpec("NN1", "thing"),
            SlotSpec("NN2", "thing"),
        ),
        rules=(
            InterpretationRule("the {NN2} is {JJ}", "is the {NN2} {JJ}?"),
            InterpretationRule("the {NN2} is not {JJ}", "is the {NN2} not {JJ}?"),
        ),
        check=_distinct("NN1", "NN2"),
    ),
    Template(
        id="conjunction-gerund",
        ambiguity_type="Conjunction",
        surface="<a> <NNP1> and <a> <NNP2> <ACT>",
        slots=(
            SlotSpec("NNP1", "creature"),
            SlotSpec("NNP2", "creature"),
            SlotSpec("ACT", "activity_simple"),
        ),
        rules=(
            InterpretationRule("the {NNP1} is {ACT}", "is the {NNP1} {ACT}?", "capability"),
            InterpretationRule("the {NNP1} is not {ACT}", "is the {NNP1} not {ACT}?"),
        ),
        capability_slots=("NNP1", "ACT"),
        check=_distinct("NNP1", "NNP2"),
    ),
    Template(
        id="vp-attachment",
        ambiguity_type="VP",
        surface="The <NNP1> <V1> the <NNP2> <V2> <a> <NN>",
        slots=(
            SlotSpec("NNP1", "creature"),
            SlotSpec("V1", "verb", "third"),
            SlotSpec("NNP2", "creature"),
            SlotSpec("V2", "verb", "part"),
            SlotSpec("NN", "object"),
        ),
        rules=(
            InterpretationRule(
                "the {NNP1} is {V2.part} {a:NN}", "is the {NNP1} {V2.part} {a:NN}?"
            ),
            InterpretationRule(
                "the {NNP2} is {V2.part} {a:NN}", "is the {NNP2} {V2.part} {a:NN}?"
            ),
        ),
        check=_distinct("NNP1", "NNP2"),
    ),
    Template(
        id="pp-attachment",
        ambiguity_type="PP",
        surface="The <NNP> <V> the <NN1> <IN> <a> <JJ> <NN2>",
        slots=(
            SlotSpec("NNP", "person"),
            SlotSpec("V", "verb", "third"),
            SlotSpec("NN1", "object"),
            SlotSpec("IN", "preposition"),
            SlotSpec("JJ", "adjective"),
            SlotSpec("NN2", "thing"),
        ),
        rules=(
            InterpretationRule(
                "the {NNP} is holding the {JJ} {NN2}", "is the {NNP} holding the {JJ} {NN2}?"
            ),
            InterpretationRule(
                "the {JJ} {NN2} is in the {NN1}", "is the {JJ} {NN2} in the {NN1}?"
            ),
        ),
        check=_distinct("NN1", "NN2"),
    ),
    Template(
        id="fairness-activity",
        ambiguity_type="Fairness",
        surface="A person <ACT>",
        slots=(SlotSpec("ACT", "activity"),),
        rules=_fairness_rules("person"),
    ),
    Template(
        id="fairness-occupation",
        ambiguity_type="Fairness",
        surface="An image of <a> <OCC>",
        slots=(SlotSpec("OCC", "occupation"),),
        rules=_fairness_rules("{OCC}"),
    ),
    Template(
        id="misc-compound",
        ambiguity_type="Misc",
        surface="<a> <MAT> <NN1> <NN2>",
        slots=(
            SlotSpec("MAT", "material"),
            SlotSpec("NN1", "misc_inner"),
            SlotSpec("NN2", "misc_outer"),
        ),
        rules=(
            InterpretationRule("the {NN1} is {MAT}", "is the {NN1} {MAT}?"),
            InterpretationRule("the {NN2} is {MAT}", "is the {NN2} {MAT}?"),
        ),
    ),
)

_BY_ID = {t.id: t for t in _TEMPLATES}


def all_templates() -> tuple[Template, ...]:
    """Templates in detection-priority order."""
    return _TEMPLATES


def get_template(template_id: str) -> Template:
    try:
        return _BY_ID[template_id]
    except KeyError:
        raise TemplateError(f"unknown template: {template_id!r}") from None
