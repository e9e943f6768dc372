"""Few-shot clarification: prompt building, continuation parsing, oracle fallback.

The engine turns an ambiguous prompt into clarifying questions or candidate
visual setups, either by prompting a completion endpoint with a fixed shot
library or by reading the answer straight off the template grammar.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from importlib import resources

from .grammar import (
    AmbiguousPrompt,
    Lexicon,
    TemplateError,
    detect_ambiguity,
    enumerate_interpretations,
)

_QUESTION_TASK = "Generate disambiguating question"
_SETUP_TASK = "Generate possible visual setups"
_STOP_MARKER = "###"


class ClarifyError(RuntimeError):
    pass


class FewShotMode(str, enum.Enum):
    ONE_QUESTION = "one_question"
    MULTI_QUESTION = "multi_question"
    MULTI_SETUP = "multi_setup"

    @property
    def cue(self) -> str:
        return "Setup" if self is FewShotMode.MULTI_SETUP else "Question"

    @property
    def task(self) -> str:
        return _SETUP_TASK if self is FewShotMode.MULTI_SETUP else _QUESTION_TASK


@dataclass(frozen=True)
class ShotExample:
    context: str
    outputs: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.outputs:
            raise ClarifyError(f"shot {self.context!r} has no outputs")


@dataclass(frozen=True)
class DecodeParams:
    temperature: float = 0.0
    max_tokens: int = 64
    stop: tuple[str, ...] = (_STOP_MARKER,)


@dataclass(frozen=True)
class ClarificationResult:
    prompt_id: str
    mode: FewShotMode
    items: tuple[str, ...]
    raw_continuation: str
    source: str  # "model" | "oracle"


SHOT_LIBRARIES = (
    "one_question",
    "multi_question",
    "multi_setup",
    "ablation_pp",
    "ablation_vp",
    "ablation_conjunction",
    "ablation_anaphora",
    "ablation_ellipsis",
    "ablation_fairness",
)

ABLATION_LIBRARIES = {
    "PP": "ablation_pp",
    "VP": "ablation_vp",
    "Conjunction": "ablation_conjunction",
    "Anaphora": "ablation_anaphora",
    "Ellipsis": "ablation_ellipsis",
    "Fairness": "ablation_fairness",
}

_DEFAULT_LIBRARY = {
    FewShotMode.ONE_QUESTION: "one_question",
    FewShotMode.MULTI_QUESTION: "multi_question",
    FewShotMode.MULTI_SETUP: "multi_setup",
}


def load_shot_library(name: str) -> list[ShotExample]:
    """Load a named shot library shipped with the package."""
    if name not in SHOT_LIBRARIES:
        raise ClarifyError(f"unknown shot library: {name!r}")
    text = resources.files("promptlens").joinpath(f"data/shots/{name}.json").read_text("utf-8")
    doc = json.loads(text)
    return [ShotExample(s["context"], tuple(s["outputs"])) for s in doc["shots"]]


def default_shots(mode: FewShotMode) -> list[ShotExample]:
    return load_shot_library(_DEFAULT_LIBRARY[mode])


def ablation_shots(ambiguity_type: str, n_shots: int) -> list[ShotExample]:
    """The first ``n_shots`` examples of the per-type ablation library."""
    try:
        library = ABLATION_LIBRARIES[ambiguity_type]
    except KeyError:
        raise ClarifyError(f"no ablation shot library for type {ambiguity_type!r}") from None
    shots = load_shot_library(library)
    if not 1 <= n_shots <= len(shots):
        raise ClarifyError(f"shot count must be between 1 and {len(shots)}")
    return shots[:n_shots]


def _target_text(target: AmbiguousPrompt | str) -> str:
    return target.text if isinstance(target, AmbiguousPrompt) else target


def build_fewshot_prompt(
    mode: FewShotMode,
    shots: list[ShotExample],
    target: AmbiguousPrompt | str,
) -> str:
    """Assemble the completion prompt: task line, shots, then a dangling cue."""
    if not shots:
        raise ClarifyError("at least one shot is required")
    if mode is FewShotMode.ONE_QUESTION and any(len(s.outputs) != 1 for s in shots):
        raise ClarifyError("one-question mode requires exactly one output per shot")
    lines = [mode.task, ""]
    for shot in shots:
        lines.append(f"Context: {shot.context}")
        for output in shot.outputs:
            lines.append(f"{mode.cue}: {output}")
        lines.append(_STOP_MARKER)
    lines.append(f"Context: {_target_text(target)}")
    lines.append(f"{mode.cue}:")
    return "\n".join(lines)


def parse_generation(mode: FewShotMode, continuation: str) -> list[str]:
    """Extract question/setup items from a raw model continuation.

    The continuation is cut at the first stop marker or at the next
    "Context:" line; cue-prefixed lines and the dangling-cue first line are
    kept verbatim apart from whitespace trimming.
    """
    text = continuation.split(_STOP_MARKER, 1)[0]
    prefix = f"{mode.cue}:"
    items: list[str] = []
    for i, line in enumerate(text.split("\n")):
        stripped = line.strip()
        if stripped.startswith("Context:"):
            break
        if stripped.startswith(prefix):
            stripped = stripped[len(prefix):].strip()
        elif i != 0:
            continue  # between cue lines; ignore stray prose
        if stripped:
            items.append(stripped)
    if mode is FewShotMode.ONE_QUESTION:
        items = items[:1]
    return items


def clarify(
    prompt: AmbiguousPrompt,
    mode: FewShotMode,
    shots: list[ShotExample],
    lm_client,
    decode_params: DecodeParams = DecodeParams(),
) -> ClarificationResult:
    """Ask the completion endpoint to clarify; parsing never invents items."""
    fewshot = build_fewshot_prompt(mode, shots, prompt)
    continuation = lm_client.complete(fewshot, decode_params)
    items = parse_generation(mode, continuation)
    return ClarificationResult(
        prompt_id=prompt.id,
        mode=mode,
        items=tuple(items),
        raw_continuation=continuation,
        source="model",
    )


def fallback_clarify(
    prompt: AmbiguousPrompt | str,
    mode: FewShotMode,
    lexicon: Lexicon,
) -> ClarificationResult:
    """Deterministic oracle: read questions/setups off the template grammar."""
    if isinstance(prompt, AmbiguousPrompt):
        resolved = prompt
    else:
        result = detect_ambiguity(prompt, lexicon)
        if result is None:
            raise ClarifyError(f"prompt is not detectable: {prompt!r}")
        resolved = AmbiguousPrompt(
            id="adhoc",
            text=prompt,
            ambiguity_type=result.ambiguity_type,
            template_id=result.template_id,
            bindings=result.bindings,
        )
    try:
        interpretations = enumerate_interpretations(resolved, lexicon)
    except TemplateError as exc:
        raise ClarifyError(str(exc)) from exc
    if mode is FewShotMode.ONE_QUESTION:
        items = (interpretations[0].question_text,)
    elif mode is FewShotMode.MULTI_QUESTION:
        items = tuple(i.question_text for i in interpretations)
    else:
        items = tuple(i.setup_text for i in interpretations)
    return ClarificationResult(
        prompt_id=resolved.id,
        mode=mode,
        items=items,
        raw_continuation="",
        source="oracle",
    )
