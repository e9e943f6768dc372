"""Deterministic stub endpoints for offline runs and closed-loop tests.

One FastAPI app serves all four endpoint contracts:

* ``/complete`` answers few-shot clarification prompts using the template
  grammar as an oracle,
* ``/t2i`` renders small PNGs that carry their prompt in a text chunk,
* ``/vqa`` answers "yes" exactly when some sentence of the embedded prompt
  states what the question asks,
* ``/paraphrase`` reverses sentence order (identity for one sentence).

Identical requests always produce identical bytes, so experiment reports
are reproducible and image caches stay warm across runs.
"""

from __future__ import annotations

import asyncio
import base64
import hashlib
import io
from collections import Counter

import httpx
from fastapi import FastAPI
from PIL import Image, PngImagePlugin
from pydantic import BaseModel

from .clarify import FewShotMode, fallback_clarify
from .grammar import Lexicon, default_lexicon, detect_ambiguity

# Kept deliberately small: "not" and "and" are load-bearing for telling
# interpretations apart, so they stay.
_VQA_STOPWORDS = {"is", "are", "does", "do", "the", "a", "an", "it", "of", "also"}


def _content_multiset(text: str) -> Counter:
    tokens = [t.strip(".,;:?!").lower() for t in text.split()]
    return Counter(t for t in tokens if t and t not in _VQA_STOPWORDS)


def _sentences(text: str) -> list[str]:
    parts: list[str] = []
    for chunk in text.replace(";", ".").split("."):
        chunk = chunk.strip()
        if chunk:
            parts.append(chunk)
    return parts


def mock_vqa_answer(prompt: str, question: str) -> str:
    """"yes" iff some sentence of the prompt matches the question word-for-word."""
    want = _content_multiset(question)
    if want and any(_content_multiset(s) == want for s in _sentences(prompt)):
        return "yes"
    return "no"


def render_mock_image(prompt: str, index: int) -> bytes:
    """A flat-color PNG whose metadata carries the prompt that produced it."""
    digest = hashlib.sha256(f"{prompt}|{index}".encode()).digest()
    image = Image.new("RGB", (64, 64), tuple(digest[:3]))
    info = PngImagePlugin.PngInfo()
    info.add_text("prompt", prompt)
    info.add_text("index", str(index))
    buffer = io.BytesIO()
    image.save(buffer, format="PNG", pnginfo=info)
    return buffer.getvalue()


def read_image_prompt(image_bytes: bytes) -> str | None:
    try:
        with Image.open(io.BytesIO(image_bytes)) as image:
            return image.info.get("prompt")
    except OSError:
        return None


def mock_paraphrase(text: str) -> str:
    """Reverse sentence order; single sentences pass through unchanged."""
    sentences = _sentences(text)
    if len(sentences) < 2:
        return text
    return " ".join(s + "." for s in reversed(sentences))


def _infer_mode(prompt: str) -> FewShotMode:
    lines = prompt.split("\n")
    if lines and lines[0].strip() == "Generate possible visual setups":
        return FewShotMode.MULTI_SETUP
    # One vs many questions: look at the largest cue run within a shot block.
    best = run = 0
    for line in lines:
        if line.startswith("Question:"):
            run += 1
            best = max(best, run)
        else:
            run = 0
    return FewShotMode.MULTI_QUESTION if best > 1 else FewShotMode.ONE_QUESTION


def mock_completion(prompt: str, lexicon: Lexicon) -> str:
    """Continue a few-shot clarification prompt using the grammar oracle."""
    target = None
    for line in prompt.split("\n"):
        if line.startswith("Context:"):
            target = line[len("Context:"):].strip()
    if target is None or detect_ambiguity(target, lexicon) is None:
        return " I am not sure.\n###"
    mode = _infer_mode(prompt)
    result = fallback_clarify(target, mode, lexicon)
    cue = mode.cue
    lines = [" " + result.items[0]]
    for item in result.items[1:]:
        lines.append(f"{cue}: {item}")
    lines.append("###")
    return "\n".join(lines)


class _CompleteRequest(BaseModel):
    prompt: str
    max_tokens: int = 64
    temperature: float = 0.0
    stop: list[str] = []


class _T2IRequest(BaseModel):
    prompt: str
    n: int


class _VQARequest(BaseModel):
    image: str
    question: str


class _ParaphraseRequest(BaseModel):
    text: str


def create_mock_app(lexicon: Lexicon | None = None) -> FastAPI:
    lexicon = lexicon or default_lexicon()
    app = FastAPI(title="promptlens mock endpoints")

    @app.post("/complete")
    def complete(req: _CompleteRequest) -> dict:
        return {"continuation": mock_completion(req.prompt, lexicon)}

    @app.post("/t2i")
    def t2i(req: _T2IRequest) -> dict:
        images = [
            base64.b64encode(render_mock_image(req.prompt, i)).decode("ascii")
            for i in range(req.n)
        ]
        return {"images": images}

    @app.post("/vqa")
    def vqa(req: _VQARequest) -> dict:
        prompt = read_image_prompt(base64.b64decode(req.image))
        if prompt is None:
            return {"answer": "no", "score": 0.0}
        return {"answer": mock_vqa_answer(prompt, req.question), "score": 1.0}

    @app.post("/paraphrase")
    def paraphrase(req: _ParaphraseRequest) -> dict:
        return {"paraphrase": mock_paraphrase(req.text)}

    return app


class InProcessTransport(httpx.BaseTransport):
    """Sync httpx transport that drives an ASGI app without a socket."""

    def __init__(self, app) -> None:
        self._inner = httpx.ASGITransport(app=app)

    def handle_request(self, request: httpx.Request) -> httpx.Response:
        async def roundtrip() -> tuple[int, httpx.Headers, bytes]:
            response = await self._inner.handle_async_request(request)
            content = await response.aread()
            return response.status_code, response.headers, content

        status, headers, content = asyncio.run(roundtrip())
        return httpx.Response(status_code=status, headers=headers, content=content)


def make_mock_clients(lexicon: Lexicon | None = None):
    """In-process clients for all four endpoints, backed by one mock app."""
    from .clients import CompletionClient, ParaphraseClient, T2IClient, VQAClient

    transport = InProcessTransport(create_mock_app(lexicon))
    return (
        CompletionClient(url="http://mock/complete", transport=transport),
        T2IClient(url="http://mock/t2i", transport=transport),
        VQAClient(url="http://mock/vqa", transport=transport),
        ParaphraseClient(url="http://mock/paraphrase", transport=transport),
    )
