"""Human-in-the-loop disambiguation sessions.

A session pairs one benchmark record and one target interpretation with a
clarification (questions or setups).  The operator answers, selects, or
skips; answered and selected sessions yield a disambiguated prompt by
concatenating the disambiguation signal onto the original text.  Sessions
log every event and can be reconstructed from their logs exactly.
"""

from __future__ import annotations

import json
import uuid
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Iterable

from .clarify import ClarificationResult, FewShotMode
from .grammar import BenchmarkRecord, Interpretation
from .grammar.generate import record_from_dict, record_to_dict

SCHEMA_VERSION = 1

_TERMINAL = ".!?"


class SessionError(RuntimeError):
    pass


@dataclass(frozen=True)
class Resolution:
    kind: str  # "pending" | "answered" | "selected" | "skipped"
    signal: str | None = None
    index: int | None = None


@dataclass(frozen=True)
class Answer:
    text: str


@dataclass(frozen=True)
class Select:
    index: int


@dataclass(frozen=True)
class Skip:
    pass


@dataclass(frozen=True)
class Session:
    session_id: str
    record: BenchmarkRecord
    intention_index: int
    mode: FewShotMode
    clarification: ClarificationResult
    resolution: Resolution = Resolution("pending")
    disambiguated_prompt: str | None = None
    paraphrased_prompt: str | None = None
    # Logical event clock: monotonically increasing event index, so that
    # scripted and interactive runs produce byte-identical logs.
    created_at: int = 0
    resolved_at: int | None = None
    events: tuple[dict, ...] = ()

    @property
    def intention(self) -> Interpretation:
        return self.record.interpretations[self.intention_index]

    @property
    def pending(self) -> bool:
        return self.resolution.kind == "pending"


def concatenate_signal(original: str, signal: str) -> str:
    """Append a declarative signal sentence to the original prompt text."""
    sentence = signal.strip()
    sentence = sentence[:1].upper() + sentence[1:]
    if not sentence.endswith(tuple(_TERMINAL)):
        sentence += "."
    joiner = " " if original.endswith(tuple(_TERMINAL)) else ". "
    return original + joiner + sentence


def _yes_no(text: str) -> str | None:
    """Polarity of an answer: its leading word, so "No, it is..." reads as no."""
    first = text.strip().lower().replace(",", " ").split(None, 1)
    head = first[0].rstrip(".!?") if first else ""
    return head if head in ("yes", "no") else None


def open_session(
    record: BenchmarkRecord,
    intention_index: int,
    mode: FewShotMode,
    clarifier: Callable[..., ClarificationResult],
    session_id: str | None = None,
) -> Session:
    """Start a pending session targeting one ground-truth interpretation."""
    if not 0 <= intention_index < len(record.interpretations):
        raise SessionError(
            f"intention index {intention_index} out of range for record {record.prompt.id} "
            f"({len(record.interpretations)} interpretations)"
        )
    clarification = clarifier(record.prompt, mode)
    session_id = session_id or uuid.uuid4().hex[:12]
    event = {
        "schema_version": SCHEMA_VERSION,
        "event": "open",
        "t": 0,
        "session_id": session_id,
        "record": record_to_dict(record),
        "intention_index": intention_index,
        "mode": mode.value,
        "clarification": {
            "prompt_id": clarification.prompt_id,
            "mode": clarification.mode.value,
            "items": list(clarification.items),
            "raw_continuation": clarification.raw_continuation,
            "source": clarification.source,
        },
    }
    return Session(
        session_id=session_id,
        record=record,
        intention_index=intention_index,
        mode=mode,
        clarification=clarification,
        events=(event,),
    )


def _signal_for_answer(session: Session, text: str) -> str:
    """Map a yes/no answer through the ground truth; free text passes verbatim."""
    polarity = _yes_no(text)
    interpretations = session.record.interpretations
    asked = None
    if session.clarification.items:
        first = session.clarification.items[0].strip().lower()
        for interp in interpretations:
            if interp.question_text.strip().lower() == first:
                asked = interp
                break
    if polarity == "yes" and asked is not None:
        return asked.setup_text
    if polarity == "no" and asked is not None and len(interpretations) == 2:
        other = interpretations[1 - asked.index]
        return other.setup_text
    return text.strip()


def resolve(session: Session, action: Answer | Select | Skip) -> Session:
    """Apply the one allowed resolution; the session is immutable afterwards."""
    if not session.pending:
        raise SessionError(f"session {session.session_id} is already resolved")
    t = len(session.events)
    event: dict = {"schema_version": SCHEMA_VERSION, "event": "resolve", "t": t}
    if isinstance(action, Skip):
        resolution = Resolution("skipped")
        disambiguated = None
        event["action"] = {"kind": "skip"}
    elif isinstance(action, Select):
        if not 0 <= action.index < len(session.clarification.items):
            raise SessionError(
                f"selection {action.index} out of range "
                f"({len(session.clarification.items)} items)"
            )
        signal = session.clarification.items[action.index]
        resolution = Resolution("selected", index=action.index)
        disambiguated = concatenate_signal(session.record.prompt.text, signal)
        event["action"] = {"kind": "select", "index": action.index}
    elif isinstance(action, Answer):
        signal = _signal_for_answer(session, action.text)
        resolution = Resolution("answered", signal=signal)
        disambiguated = concatenate_signal(session.record.prompt.text, signal)
        event["action"] = {"kind": "answer", "text": action.text}
    else:
        raise SessionError(f"unknown action: {action!r}")
    return replace(
        session,
        resolution=resolution,
        disambiguated_prompt=disambiguated,
        resolved_at=t,
        events=session.events + (event,),
    )


def paraphrase(session: Session, paraphrase_client) -> Session:
    """Attach a paraphrase of the disambiguated prompt (original retained)."""
    if session.disambiguated_prompt is None:
        raise SessionError("session has no disambiguated prompt to paraphrase")
    text = paraphrase_client.paraphrase(session.disambiguated_prompt)
    event = {
        "schema_version": SCHEMA_VERSION,
        "event": "paraphrase",
        "t": len(session.events),
        "paraphrase": text,
    }
    return replace(session, paraphrased_prompt=text, events=session.events + (event,))


# --- persistence -----------------------------------------------------------

def persist(session: Session, path: str | Path) -> None:
    """Write the session's event log, one JSON object per line."""
    with open(path, "w", encoding="utf-8") as fh:
        for event in session.events:
            fh.write(json.dumps(event, ensure_ascii=False) + "\n")


def _replay(events: list[dict]) -> Session:
    if not events:
        raise SessionError("no session: log is empty")
    head = events[0]
    if head.get("event") != "open":
        raise SessionError("log must start with an open event")
    clar = head["clarification"]
    session = Session(
        session_id=head["session_id"],
        record=record_from_dict(head["record"]),
        intention_index=head["intention_index"],
        mode=FewShotMode(head["mode"]),
        clarification=ClarificationResult(
            prompt_id=clar["prompt_id"],
            mode=FewShotMode(clar["mode"]),
            items=tuple(clar["items"]),
            raw_continuation=clar["raw_continuation"],
            source=clar["source"],
        ),
        events=(head,),
    )
    for event in events[1:]:
        kind = event.get("event")
        if kind == "resolve":
            action = event["action"]
            if action["kind"] == "skip":
                session = resolve(session, Skip())
            elif action["kind"] == "select":
                session = resolve(session, Select(action["index"]))
            elif action["kind"] == "answer":
                session = resolve(session, Answer(action["text"]))
            else:
                raise SessionError(f"unknown action kind {action.get('kind')!r}")
        elif kind == "paraphrase":
            class _Fixed:
                def __init__(self, text: str) -> None:
                    self._text = text

                def paraphrase(self, _: str) -> str:
                    return self._text

            session = paraphrase(session, _Fixed(event["paraphrase"]))
        else:
            raise SessionError(f"unknown event type {kind!r}")
    return session


def load(path: str | Path) -> Session:
    events = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                events.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise SessionError(f"{path}:{lineno}: corrupt log line: {exc}") from exc
    return _replay(events)


# --- batch protocol --------------------------------------------------------

@dataclass
class BatchResult:
    sessions: list[Session]

    @property
    def total(self) -> int:
        return len(self.sessions)

    def count(self, kind: str) -> int:
        return sum(1 for s in self.sessions if s.resolution.kind == kind)

    @property
    def success_rate(self) -> float:
        if not self.sessions:
            return 0.0
        return (self.count("answered") + self.count("selected")) / self.total


def auto_policy(session: Session) -> Answer | Select | Skip:
    """Cooperative answering straight from the ground-truth intention.

    Selection modes pick the intention's setup when offered; question modes
    answer yes/no when the asked question identifies an interpretation, and
    fall back to stating the intention outright.
    """
    intention = session.intention
    items = [i.strip().lower() for i in session.clarification.items]
    if session.mode is FewShotMode.MULTI_SETUP:
        target = intention.setup_text.strip().lower()
        if target in items:
            return Select(items.index(target))
        return Skip()
    if items and items[0] == intention.question_text.strip().lower():
        return Answer("yes")
    if items and len(session.record.interpretations) == 2:
        other = session.record.interpretations[1 - session.intention_index]
        if items[0] == other.question_text.strip().lower():
            return Answer("no")
    return Answer(intention.setup_text)


def run_batch(
    records: Iterable[BenchmarkRecord],
    mode: FewShotMode,
    clarifier: Callable[..., ClarificationResult],
    policy: Callable[[Session], Answer | Select | Skip] = auto_policy,
) -> BatchResult:
    """One session per (record, interpretation) pair, resolved by ``policy``."""
    sessions = []
    for record in records:
        for index in range(len(record.interpretations)):
            session = open_session(
                record,
                index,
                mode,
                clarifier,
                session_id=f"{record.prompt.id}-i{index}",
            )
            sessions.append(resolve(session, policy(session)))
    return BatchResult(sessions)
