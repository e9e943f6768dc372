"""Benchmark generation: prompts, interpretations, and the JSONL dataset file."""

from __future__ import annotations

import hashlib
import json
import logging
import random
from dataclasses import dataclass, replace
from pathlib import Path

from .detect import detect_ambiguity
from .lexicon import Lexicon
from .templates import (
    LINGUISTIC_TYPES,
    FAIRNESS_RULE_COUNT,
    Template,
    TemplateError,
    fairness_rules_for_subject,
    get_template,
    normalize_bindings,
    render_rule,
    render_surface,
    resolve_cs,
)

log = logging.getLogger(__name__)

EXTRA_BUCKET = "complex+combination+misc"


class GenerationError(RuntimeError):
    """Raised when the lexicon cannot supply enough distinct prompts."""


@dataclass(frozen=True)
class AmbiguousPrompt:
    id: str
    text: str
    ambiguity_type: str
    template_id: str
    bindings: dict
    complexity: str = "simple"  # "simple" | "complex"
    is_combination: bool = False


@dataclass(frozen=True)
class Interpretation:
    index: int
    setup_text: str
    question_text: str
    cs_label: str  # "CS" | "UCS"


@dataclass(frozen=True)
class BenchmarkRecord:
    prompt: AmbiguousPrompt
    interpretations: tuple[Interpretation, ...]

    @property
    def setups(self) -> list[str]:
        return [i.setup_text for i in self.interpretations]

    @property
    def questions(self) -> list[str]:
        return [i.question_text for i in self.interpretations]


@dataclass
class GenerationConfig:
    pp: int = 0
    vp: int = 0
    conjunction: int = 0
    anaphora: int = 0
    ellipsis: int = 0
    fairness: int = 0
    complex: int = 0
    combination: int = 0
    misc: int = 0

    FIELDS = ("pp", "vp", "conjunction", "anaphora", "ellipsis", "fairness", "complex", "combination", "misc")

    def __post_init__(self) -> None:
        for name in self.FIELDS:
            if getattr(self, name) < 0:
                raise ValueError(f"count {name!r} must be >= 0")

    @property
    def total(self) -> int:
        return sum(getattr(self, n) for n in self.FIELDS)

    def to_dict(self) -> dict:
        return {n: getattr(self, n) for n in self.FIELDS}

    @classmethod
    def from_dict(cls, doc: dict) -> "GenerationConfig":
        unknown = set(doc) - set(cls.FIELDS)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**{n: int(doc.get(n, 0)) for n in cls.FIELDS})

    @classmethod
    def benchmark_default(cls) -> "GenerationConfig":
        """The shipped full-size configuration (1200 records)."""
        return cls(
            pp=74, vp=243, conjunction=127, anaphora=21, ellipsis=45,
            fairness=355, complex=200, combination=100, misc=35,
        )

    def hash(self) -> str:
        payload = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(payload).hexdigest()[:16]


@dataclass
class Benchmark:
    records: list[BenchmarkRecord]
    seed: int
    config: GenerationConfig

    @property
    def config_hash(self) -> str:
        return self.config.hash()


def record_bucket(record: BenchmarkRecord) -> str:
    """Counting bucket: complex, combination and misc cases share one bucket."""
    p = record.prompt
    if p.complexity == "complex" or p.is_combination or p.ambiguity_type == "Misc":
        return EXTRA_BUCKET
    return p.ambiguity_type


def instantiate_template(
    template: Template | str,
    bindings: dict,
    lexicon: Lexicon,
    prompt_id: str = "adhoc",
) -> AmbiguousPrompt:
    """Render a prompt from explicit bindings (verbs accepted in any inflection)."""
    if isinstance(template, str):
        template = get_template(template)
    canonical = normalize_bindings(template, bindings, lexicon)
    text = render_surface(template, canonical, lexicon)
    return AmbiguousPrompt(
        id=prompt_id,
        text=text,
        ambiguity_type=template.ambiguity_type,
        template_id=template.id,
        bindings=canonical,
    )


def enumerate_interpretations(prompt: AmbiguousPrompt, lexicon: Lexicon) -> list[Interpretation]:
    """Ordered interpretations; combinations append six identity readings per occupation."""
    template = get_template(prompt.template_id)
    out: list[Interpretation] = []
    for rule in template.rules:
        out.append(
            Interpretation(
                index=len(out),
                setup_text=render_rule(template, rule.setup, prompt.bindings, lexicon),
                question_text=render_rule(template, rule.question, prompt.bindings, lexicon),
                cs_label=resolve_cs(template, rule, prompt.bindings, lexicon),
            )
        )
    if prompt.is_combination:
        for slot_name in template.person_slots(lexicon):
            lexeme = prompt.bindings.get(slot_name)
            if lexeme in lexicon.occupations:
                for rule in fairness_rules_for_subject(lexeme):
                    out.append(
                        Interpretation(
                            index=len(out),
                            setup_text=rule.setup,
                            question_text=rule.question,
                            cs_label="CS",
                        )
                    )
    return out


def make_record(prompt: AmbiguousPrompt, lexicon: Lexicon) -> BenchmarkRecord:
    interpretations = tuple(enumerate_interpretations(prompt, lexicon))
    setups = [i.setup_text for i in interpretations]
    if len(set(setups)) != len(setups):
        raise GenerationError(f"duplicate setups for prompt {prompt.text!r}")
    return BenchmarkRecord(prompt, interpretations)


def complexify(
    prompt: AmbiguousPrompt,
    lexicon: Lexicon,
    seed: int,
    new_id: str | None = None,
) -> AmbiguousPrompt:
    """Append a decoration clause; ambiguity type and interpretations stay put."""
    if prompt.complexity != "simple":
        raise TemplateError(f"prompt {prompt.id} is already complex")
    if not lexicon.decorations:
        log.info("no decorations available; leaving prompt %s unchanged", prompt.id)
        return prompt
    rng = random.Random(f"{seed}|complex|{prompt.text}")
    decoration = rng.choice(lexicon.decorations)
    if prompt.text.endswith("."):
        text = prompt.text[:-1] + " " + decoration + "."
    else:
        text = prompt.text + " " + decoration
    return replace(prompt, id=new_id or prompt.id, text=text, complexity="complex")


def combine_fairness(
    prompt: AmbiguousPrompt,
    lexicon: Lexicon,
    seed: int,
    new_id: str | None = None,
) -> AmbiguousPrompt:
    """Swap person nouns for occupations, adding identity underspecification."""
    if prompt.is_combination:
        raise TemplateError(f"prompt {prompt.id} is already a combination case")
    if prompt.ambiguity_type not in LINGUISTIC_TYPES:
        raise TemplateError("combination applies to linguistic prompts only")
    template = get_template(prompt.template_id)
    person_slots = [
        name
        for name in template.person_slots(lexicon)
        if prompt.bindings.get(name) in lexicon.person_nouns
    ]
    if not person_slots:
        raise TemplateError(f"prompt {prompt.id} has no person-noun slot")
    rng = random.Random(f"{seed}|combine|{prompt.text}")
    occupations = rng.sample(lexicon.occupations, len(person_slots))
    bindings = dict(prompt.bindings)
    for name, occupation in zip(person_slots, occupations):
        bindings[name] = occupation
    canonical = normalize_bindings(template, bindings, lexicon)
    text = render_surface(template, canonical, lexicon)
    return replace(
        prompt,
        id=new_id or prompt.id,
        text=text,
        bindings=canonical,
        is_combination=True,
    )


# Binding samplers draw from person/animal nouns only; occupations enter via
# combination cases.

def _sample_distinct(rng: random.Random, pool, k: int) -> list:
    return rng.sample(list(pool), k)


def _sample_bindings(template_id: str, rng: random.Random, lexicon: Lexicon) -> dict:
    verbs = [v.base for v in lexicon.transitive_verbs]
    if template_id == "pp-attachment":
        return {
            "NNP": rng.choice(lexicon.person_nouns),
            "V": rng.choice(verbs),
            "NN1": rng.choice(lexicon.object_nouns),
            "IN": rng.choice(lexicon.prepositions),
            "JJ": rng.choice(lexicon.adjectives),
            "NN2": rng.choice(lexicon.things()),
        }
    if template_id == "vp-attachment":
        nnp1, nnp2 = _sample_distinct(rng, lexicon.creatures(), 2)
        v1, v2 = _sample_distinct(rng, verbs, 2)
        return {"NNP1": nnp1, "V1": v1, "NNP2": nnp2, "V2": v2, "NN": rng.choice(lexicon.object_nouns)}
    if template_id == "conjunction-adjective":
        nn1, nn2 = _sample_distinct(rng, lexicon.things(), 2)
        return {
            "NNP": rng.choice(lexicon.creatures()),
            "V": rng.choice(verbs),
            "JJ": rng.choice(lexicon.adjectives),
            "NN1": nn1,
            "NN2": nn2,
        }
    if template_id == "conjunction-gerund":
        nnp1, nnp2 = _sample_distinct(rng, lexicon.creatures(), 2)
        return {"NNP1": nnp1, "NNP2": nnp2, "ACT": rng.choice(lexicon.simple_activities())}
    if template_id == "anaphora-it":
        nn1, nn2 = _sample_distinct(rng, lexicon.things(), 2)
        return {
            "NNP": rng.choice(lexicon.creatures()),
            "V": rng.choice(verbs),
            "NN1": nn1,
            "NN2": nn2,
            "JJ": rng.choice(lexicon.adjectives),
        }
    if template_id == "ellipsis-also":
        nnp1, nnp2, nnp3 = _sample_distinct(rng, lexicon.creatures(), 3)
        return {"NNP1": nnp1, "V": rng.choice(verbs), "NNP2": nnp2, "NNP3": nnp3}
    raise TemplateError(f"no sampler for template {template_id!r}")


_TYPE_TEMPLATES = {
    "PP": ("pp-attachment",),
    "VP": ("vp-attachment",),
    "Conjunction": ("conjunction-adjective", "conjunction-gerund"),
    "Anaphora": ("anaphora-it",),
    "Ellipsis": ("ellipsis-also",),
}


def _generate_linguistic(
    ambiguity_type: str,
    count: int,
    rng: random.Random,
    lexicon: Lexicon,
    seen: set[str],
) -> list[AmbiguousPrompt]:
    prompts: list[AmbiguousPrompt] = []
    attempts, cap = 0, 1000 + 200 * count
    template_ids = _TYPE_TEMPLATES[ambiguity_type]
    while len(prompts) < count:
        attempts += 1
        if attempts > cap:
            raise GenerationError(
                f"lexicon exhausted: produced {len(prompts)}/{count} distinct "
                f"{ambiguity_type} prompts"
            )
        template = get_template(rng.choice(template_ids))
        bindings = _sample_bindings(template.id, rng, lexicon)
        try:
            canonical = normalize_bindings(template, bindings, lexicon)
        except TemplateError:
            continue
        text = render_surface(template, canonical, lexicon)
        if text in seen:
            continue
        seen.add(text)
        prompts.append(
            AmbiguousPrompt(
                id="",
                text=text,
                ambiguity_type=ambiguity_type,
                template_id=template.id,
                bindings=canonical,
            )
        )
    return prompts


def _generate_enumerable(
    space: list[tuple[str, dict]],
    count: int,
    label: str,
    rng: random.Random,
    lexicon: Lexicon,
    seen: set[str],
) -> list[AmbiguousPrompt]:
    if count > len(space):
        raise GenerationError(
            f"lexicon exhausted: {label} admits {len(space)} prompts, {count} requested"
        )
    prompts = []
    for template_id, bindings in rng.sample(space, count):
        prompt = instantiate_template(template_id, bindings, lexicon)
        if prompt.text in seen:
            raise GenerationError(f"duplicate {label} prompt {prompt.text!r}")
        seen.add(prompt.text)
        prompts.append(prompt)
    return prompts


def generate_benchmark(config: GenerationConfig, lexicon: Lexicon, seed: int) -> Benchmark:
    """Deterministic benchmark for a fixed (config, lexicon, seed)."""
    rng = random.Random(f"benchmark|{seed}")
    seen: set[str] = set()
    prompts: list[AmbiguousPrompt] = []

    for ambiguity_type, count in (
        ("PP", config.pp),
        ("VP", config.vp),
        ("Conjunction", config.conjunction),
        ("Anaphora", config.anaphora),
        ("Ellipsis", config.ellipsis),
    ):
        prompts.extend(_generate_linguistic(ambiguity_type, count, rng, lexicon, seen))

    fairness_space = [("fairness-activity", {"ACT": a}) for a in lexicon.activities]
    fairness_space += [("fairness-occupation", {"OCC": o}) for o in lexicon.occupations]
    prompts.extend(
        _generate_enumerable(fairness_space, config.fairness, "fairness", rng, lexicon, seen)
    )

    misc_space = [
        ("misc-compound", {"MAT": mat, "NN1": inner, "NN2": outer})
        for mat in lexicon.materials
        for inner, outer in lexicon.misc_pairs
    ]
    prompts.extend(_generate_enumerable(misc_space, config.misc, "misc", rng, lexicon, seen))

    # Complex cases decorate a sample of the simple prompts generated above.
    decorable = [p for p in prompts if p.ambiguity_type != "Misc"]
    if config.complex > len(decorable):
        raise GenerationError(
            f"cannot build {config.complex} complex cases from {len(decorable)} base prompts"
        )
    for base in rng.sample(decorable, config.complex):
        for attempt in range(50):
            candidate = complexify(base, lexicon, seed + attempt)
            if candidate.text not in seen:
                break
        else:
            raise GenerationError(f"could not decorate {base.text!r} distinctly")
        seen.add(candidate.text)
        prompts.append(candidate)

    combinable = [
        p
        for p in prompts
        if p.ambiguity_type in LINGUISTIC_TYPES
        and p.complexity == "simple"
        and not p.is_combination
        and any(
            p.bindings.get(s) in lexicon.person_nouns
            for s in get_template(p.template_id).person_slots(lexicon)
        )
    ]
    if config.combination > len(combinable):
        raise GenerationError(
            f"cannot build {config.combination} combination cases from "
            f"{len(combinable)} eligible prompts"
        )
    for base in rng.sample(combinable, config.combination):
        for attempt in range(50):
            candidate = combine_fairness(base, lexicon, seed + attempt)
            if candidate.text not in seen:
                break
        else:
            raise GenerationError(f"could not combine {base.text!r} distinctly")
        seen.add(candidate.text)
        prompts.append(candidate)

    records = []
    for i, prompt in enumerate(prompts, start=1):
        prompt = replace(prompt, id=f"tab-{i:04d}")
        records.append(make_record(prompt, lexicon))
    return Benchmark(records=records, seed=seed, config=config)


# --- serialization ---------------------------------------------------------

def record_to_dict(record: BenchmarkRecord) -> dict:
    p = record.prompt
    return {
        "id": p.id,
        "example": p.text,
        "ambiguity_type": p.ambiguity_type,
        "template_id": p.template_id,
        "bindings": p.bindings,
        "complexity": p.complexity,
        "is_combination": p.is_combination,
        "visual_setups": [i.setup_text for i in record.interpretations],
        "cs_labels": [i.cs_label for i in record.interpretations],
        "questions": [i.question_text for i in record.interpretations],
    }


def record_from_dict(doc: dict) -> BenchmarkRecord:
    required = (
        "id", "example", "ambiguity_type", "template_id", "bindings",
        "complexity", "is_combination", "visual_setups", "cs_labels", "questions",
    )
    missing = [k for k in required if k not in doc]
    if missing:
        raise ValueError(f"record missing fields: {missing}")
    prompt = AmbiguousPrompt(
        id=doc["id"],
        text=doc["example"],
        ambiguity_type=doc["ambiguity_type"],
        template_id=doc["template_id"],
        bindings=dict(doc["bindings"]),
        complexity=doc["complexity"],
        is_combination=bool(doc["is_combination"]),
    )
    n = len(doc["visual_setups"])
    if not (len(doc["questions"]) == len(doc["cs_labels"]) == n):
        raise ValueError(f"record {doc['id']}: interpretation arrays differ in length")
    interpretations = tuple(
        Interpretation(i, s, q, c)
        for i, (s, q, c) in enumerate(zip(doc["visual_setups"], doc["questions"], doc["cs_labels"]))
    )
    return BenchmarkRecord(prompt, interpretations)


def _meta_path(path: Path) -> Path:
    return path.with_name(path.name + ".meta.json")


def save_benchmark(benchmark: Benchmark, path: str | Path) -> None:
    path = Path(path)
    with open(path, "w", encoding="utf-8") as fh:
        for record in benchmark.records:
            fh.write(json.dumps(record_to_dict(record), ensure_ascii=False) + "\n")
    meta = {
        "seed": benchmark.seed,
        "config": benchmark.config.to_dict(),
        "config_hash": benchmark.config_hash,
        "n_records": len(benchmark.records),
    }
    with open(_meta_path(path), "w", encoding="utf-8") as fh:
        fh.write(json.dumps(meta, sort_keys=True, indent=2) + "\n")


def load_benchmark(path: str | Path) -> Benchmark:
    path = Path(path)
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                records.append(record_from_dict(json.loads(line)))
            except (json.JSONDecodeError, ValueError) as exc:
                raise ValueError(f"{path}:{lineno}: bad record: {exc}") from exc
    seed, config = 0, GenerationConfig()
    meta_file = _meta_path(path)
    if meta_file.exists():
        meta = json.loads(meta_file.read_text(encoding="utf-8"))
        seed = int(meta.get("seed", 0))
        config = GenerationConfig.from_dict(meta.get("config", {}))
    return Benchmark(records=records, seed=seed, config=config)


_COUPLING_STOPWORDS = {"is", "are", "does", "do", "not", "the", "a", "an"}


def _content_words(text: str) -> list[str]:
    tokens = [t.strip(".,;:?!").lower() for t in text.split()]
    return sorted(t for t in tokens if t and t not in _COUPLING_STOPWORDS)


def validate_benchmark(benchmark: Benchmark, lexicon: Lexicon, check_counts: bool = True) -> list[str]:
    """Structural checks; returns a list of problems (empty list = valid)."""
    problems: list[str] = []
    texts = [r.prompt.text for r in benchmark.records]
    if len(set(texts)) != len(texts):
        problems.append("prompt texts are not pairwise distinct")

    buckets: dict[str, int] = {}
    for record in benchmark.records:
        p = record.prompt
        buckets[record_bucket(record)] = buckets.get(record_bucket(record), 0) + 1
        n = len(record.interpretations)
        if p.is_combination:
            if n < 2 + FAIRNESS_RULE_COUNT or (n - 2) % FAIRNESS_RULE_COUNT != 0:
                problems.append(f"{p.id}: combination record has {n} interpretations")
        elif p.ambiguity_type == "Fairness":
            if n != FAIRNESS_RULE_COUNT:
                problems.append(f"{p.id}: fairness record has {n} interpretations")
        elif n != 2:
            problems.append(f"{p.id}: expected 2 interpretations, found {n}")

        for interp in record.interpretations:
            if _content_words(interp.setup_text) != _content_words(interp.question_text):
                problems.append(
                    f"{p.id}: question/setup content mismatch at index {interp.index}"
                )

        result = detect_ambiguity(p.text, lexicon)
        if result is None:
            problems.append(f"{p.id}: text does not round-trip ({p.text!r})")
        elif (result.ambiguity_type, result.template_id, result.bindings) != (
            p.ambiguity_type,
            p.template_id,
            p.bindings,
        ):
            problems.append(f"{p.id}: detection disagrees with stored template/bindings")

        if p.complexity == "simple":
            rendered = render_surface(get_template(p.template_id), p.bindings, lexicon)
            if rendered != p.text:
                problems.append(f"{p.id}: stored text differs from rendered template")

    if check_counts:
        expected = {
            "PP": benchmark.config.pp,
            "VP": benchmark.config.vp,
            "Conjunction": benchmark.config.conjunction,
            "Anaphora": benchmark.config.anaphora,
            "Ellipsis": benchmark.config.ellipsis,
            "Fairness": benchmark.config.fairness,
            EXTRA_BUCKET: benchmark.config.complex + benchmark.config.combination + benchmark.config.misc,
        }
        for bucket, count in expected.items():
            if buckets.get(bucket, 0) != count:
                problems.append(
                    f"bucket {bucket}: expected {count} records, found {buckets.get(bucket, 0)}"
                )
    return problems
