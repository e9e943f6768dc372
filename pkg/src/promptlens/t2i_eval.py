"""Image generation + VQA faithfulness evaluation.

For each resolved session and each requested condition (ambiguous /
disambiguated / paraphrased) the harness generates images from the
condition's prompt, asks the VQA endpoint the session's intention question
per image, and reports the "yes" rate.  Images live in a content-addressed
store so re-runs issue zero new generation requests and reports reproduce
byte-identically.
"""

from __future__ import annotations

import hashlib
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .metrics import fleiss_kappa, pearson
from .session import Session

CONDITIONS = ("ambiguous", "disambiguated", "paraphrased")


class EvalError(RuntimeError):
    pass


@dataclass(frozen=True)
class ImageSet:
    prompt_text: str
    images: tuple[tuple[bytes, str], ...]  # (payload, content hash)
    n_requested: int


@dataclass(frozen=True)
class FaithfulnessResult:
    prompt_id: str
    question: str
    answers: tuple[str, ...]
    yes_count: int
    rate: float
    condition: str


class ImageStore:
    """Content-addressed image cache keyed by (prompt hash, index)."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    @staticmethod
    def prompt_key(prompt_text: str) -> str:
        return hashlib.sha256(prompt_text.encode("utf-8")).hexdigest()[:32]

    def _dir(self, prompt_text: str) -> Path:
        return self.root / self.prompt_key(prompt_text)

    def get(self, prompt_text: str, n: int) -> list[bytes] | None:
        directory = self._dir(prompt_text)
        paths = [directory / f"{i}.png" for i in range(n)]
        if not all(p.exists() for p in paths):
            return None
        return [p.read_bytes() for p in paths]

    def put(self, prompt_text: str, images: list[bytes]) -> None:
        directory = self._dir(prompt_text)
        directory.mkdir(parents=True, exist_ok=True)
        for i, payload in enumerate(images):
            (directory / f"{i}.png").write_bytes(payload)

    def get_by_hash(self, content_hash: str) -> bytes | None:
        for path in self.root.glob(f"*/*.png"):
            payload = path.read_bytes()
            if hashlib.sha256(payload).hexdigest() == content_hash:
                return payload
        return None


def generate_images(
    prompt_text: str,
    n: int,
    t2i_client,
    store: ImageStore | None = None,
) -> ImageSet:
    """Fetch (or recall from the store) n images for one prompt."""
    if n < 1:
        raise EvalError("image count must be at least 1")
    images = store.get(prompt_text, n) if store is not None else None
    if images is None:
        images = t2i_client.generate(prompt_text, n)
        if len(images) != n:
            raise EvalError(f"endpoint returned {len(images)} images, requested {n}")
        if store is not None:
            store.put(prompt_text, images)
    hashed = tuple((img, hashlib.sha256(img).hexdigest()) for img in images)
    return ImageSet(prompt_text=prompt_text, images=hashed, n_requested=n)


def vqa_answer(image: bytes, question: str, vqa_client) -> str:
    if not question.strip():
        raise EvalError("empty question")
    return vqa_client.answer(image, question).strip().lower().rstrip(".!?")


def faithfulness(
    image_set: ImageSet,
    question: str,
    vqa_client,
    prompt_id: str = "",
    condition: str = "disambiguated",
) -> FaithfulnessResult:
    if not image_set.images:
        raise EvalError("empty image set")
    answers = tuple(vqa_answer(img, question, vqa_client) for img, _ in image_set.images)
    yes_count = sum(1 for a in answers if a == "yes")
    return FaithfulnessResult(
        prompt_id=prompt_id,
        question=question,
        answers=answers,
        yes_count=yes_count,
        rate=yes_count / len(answers),
        condition=condition,
    )


@dataclass
class ExperimentRow:
    session_id: str
    prompt_id: str
    ambiguity_type: str
    condition: str
    prompt_text: str
    question: str
    answers: tuple[str, ...]
    yes_count: int
    rate: float
    image_hashes: tuple[str, ...]


@dataclass
class ExperimentReport:
    rows: list[ExperimentRow]
    config_hash: str
    per_condition_type: dict = field(default_factory=dict)
    per_condition: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "config_hash": self.config_hash,
            "per_condition": self.per_condition,
            "per_condition_type": self.per_condition_type,
            "rows": [
                {
                    "session_id": r.session_id,
                    "prompt_id": r.prompt_id,
                    "ambiguity_type": r.ambiguity_type,
                    "condition": r.condition,
                    "prompt_text": r.prompt_text,
                    "question": r.question,
                    "answers": list(r.answers),
                    "yes_count": r.yes_count,
                    "rate": r.rate,
                    "image_hashes": list(r.image_hashes),
                }
                for r in self.rows
            ],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentReport":
        rows = [
            ExperimentRow(
                session_id=r["session_id"],
                prompt_id=r["prompt_id"],
                ambiguity_type=r["ambiguity_type"],
                condition=r["condition"],
                prompt_text=r["prompt_text"],
                question=r["question"],
                answers=tuple(r["answers"]),
                yes_count=r["yes_count"],
                rate=r["rate"],
                image_hashes=tuple(r["image_hashes"]),
            )
            for r in doc["rows"]
        ]
        return cls(
            rows=rows,
            config_hash=doc["config_hash"],
            per_condition_type=dict(doc.get("per_condition_type", {})),
            per_condition=dict(doc.get("per_condition", {})),
        )


def _aggregate(rows: list[ExperimentRow]) -> dict:
    """Both averaging conventions: pooled per-image and mean of per-prompt rates."""
    total_yes = sum(r.yes_count for r in rows)
    total_answers = sum(len(r.answers) for r in rows)
    return {
        "n_items": len(rows),
        "mean_per_image": total_yes / total_answers if total_answers else 0.0,
        "mean_per_prompt": sum(r.rate for r in rows) / len(rows) if rows else 0.0,
    }


def _condition_prompt(session: Session, condition: str) -> str:
    if condition == "ambiguous":
        return session.record.prompt.text
    if condition == "disambiguated":
        if session.disambiguated_prompt is None:
            raise EvalError(f"session {session.session_id} has no disambiguated prompt")
        return session.disambiguated_prompt
    if condition == "paraphrased":
        if session.paraphrased_prompt is None:
            raise EvalError(f"session {session.session_id} has no paraphrased prompt")
        return session.paraphrased_prompt
    raise EvalError(f"unknown condition {condition!r}")


def _session_question(session: Session, question_source: str) -> str:
    if question_source == "intention":
        return session.intention.question_text
    if question_source == "generated":
        if not session.clarification.items:
            raise EvalError(f"session {session.session_id} has no generated items")
        return session.clarification.items[0]
    raise EvalError(f"unknown question source {question_source!r}")


def run_experiment(
    sessions: list[Session],
    conditions: tuple[str, ...],
    t2i_client,
    vqa_client,
    n_images: int = 4,
    store: ImageStore | None = None,
    question_source: str = "intention",
    parallelism: int = 1,
) -> ExperimentReport:
    """Score each non-skipped session under each condition."""
    for condition in conditions:
        if condition not in CONDITIONS:
            raise EvalError(f"unknown condition {condition!r}")
    active = [s for s in sessions if s.resolution.kind not in ("skipped", "pending")]
    tasks = [(session, condition) for session in active for condition in conditions]
    # Validate all prompts up front so missing paraphrases fail fast.
    prompts = {(s.session_id, c): _condition_prompt(s, c) for s, c in tasks}

    def score(task: tuple[Session, str]) -> ExperimentRow:
        session, condition = task
        prompt_text = prompts[(session.session_id, condition)]
        image_set = generate_images(prompt_text, n_images, t2i_client, store)
        question = _session_question(session, question_source)
        result = faithfulness(
            image_set, question, vqa_client,
            prompt_id=session.record.prompt.id, condition=condition,
        )
        return ExperimentRow(
            session_id=session.session_id,
            prompt_id=session.record.prompt.id,
            ambiguity_type=session.record.prompt.ambiguity_type,
            condition=condition,
            prompt_text=prompt_text,
            question=question,
            answers=result.answers,
            yes_count=result.yes_count,
            rate=result.rate,
            image_hashes=tuple(h for _, h in image_set.images),
        )

    if parallelism > 1:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            rows = list(pool.map(score, tasks))
    else:
        rows = [score(task) for task in tasks]

    config = {
        "conditions": list(conditions),
        "n_images": n_images,
        "question_source": question_source,
        "sessions": sorted(s.session_id for s in active),
    }
    config_hash = hashlib.sha256(
        json.dumps(config, sort_keys=True).encode()
    ).hexdigest()[:16]

    report = ExperimentReport(rows=rows, config_hash=config_hash)
    for condition in conditions:
        subset = [r for r in rows if r.condition == condition]
        report.per_condition[condition] = _aggregate(subset)
        for ambiguity_type in sorted({r.ambiguity_type for r in subset}):
            typed = [r for r in subset if r.ambiguity_type == ambiguity_type]
            report.per_condition_type[f"{condition}/{ambiguity_type}"] = _aggregate(typed)
    return report


def correlate_with_human(
    report: ExperimentReport,
    human_rates: dict[str, float],
    ratings_table: list[list[int]] | None = None,
) -> dict:
    """Pearson r between automatic and human rates, keyed by session id;
    optionally Fleiss' kappa over a raw per-image ratings table."""
    matched = [
        (r.rate, human_rates[r.session_id])
        for r in report.rows
        if r.session_id in human_rates
    ]
    if len(matched) < 2:
        raise EvalError("need at least two matched items for correlation")
    automatic = [m[0] for m in matched]
    human = [m[1] for m in matched]
    block: dict = {"n_matched": len(matched), "pearson_r": pearson(automatic, human)}
    if ratings_table is not None:
        block["fleiss_kappa"] = fleiss_kappa(ratings_table)
    return block
