"""HTTP facade over benchmark generation, sessions, and experiments.

The service keeps all state in in-memory stores plus the on-disk image
store; request handling itself is stateless.  Per-session writes are
serialized with a lock so concurrent resolutions cannot both succeed, and
experiments run on background threads with polled progress.
"""

from __future__ import annotations

import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, HTTPException, Request, Response
from pydantic import BaseModel

from . import session as sessions_mod
from .clarify import DecodeParams, FewShotMode, clarify, default_shots, fallback_clarify
from .grammar import (
    GenerationConfig,
    GenerationError,
    Lexicon,
    default_lexicon,
    generate_benchmark,
)
from .grammar.generate import record_to_dict
from .report import render_report
from .t2i_eval import CONDITIONS, EvalError, ImageStore, run_experiment


@dataclass
class ApiConfig:
    host: str = "127.0.0.1"
    port: int = 8400
    data_dir: str = "promptlens-data"
    lm_url: str | None = None
    t2i_url: str | None = None
    vqa_url: str | None = None
    para_url: str | None = None
    token: str | None = None
    parallelism: int = 1
    n_images: int = 4


def _error(status: int, code: str, message: str) -> HTTPException:
    return HTTPException(status_code=status, detail={"code": code, "message": message})


class _BenchmarkRequest(BaseModel):
    seed: int = 0
    config: dict = {}


class _SessionRequest(BaseModel):
    benchmark_id: str
    record_id: str
    intention_index: int
    mode: str = "one_question"
    clarifier: str = "oracle"


class _ResolveRequest(BaseModel):
    action: str
    text: str | None = None
    index: int | None = None


class _ExperimentRequest(BaseModel):
    session_ids: list[str]
    conditions: list[str] = ["ambiguous", "disambiguated"]
    n_images: int | None = None
    question_source: str = "intention"


@dataclass
class _Experiment:
    status: str = "running"  # running | done | error
    completed_prompts: int = 0
    total_prompts: int = 0
    report: dict | None = None
    error: str | None = None


def _session_to_dict(s: sessions_mod.Session) -> dict:
    return {
        "session_id": s.session_id,
        "record": record_to_dict(s.record),
        "intention_index": s.intention_index,
        "mode": s.mode.value,
        "clarification": {
            "items": list(s.clarification.items),
            "source": s.clarification.source,
            "raw_continuation": s.clarification.raw_continuation,
        },
        "resolution": {
            "kind": s.resolution.kind,
            "signal": s.resolution.signal,
            "index": s.resolution.index,
        },
        "disambiguated_prompt": s.disambiguated_prompt,
        "paraphrased_prompt": s.paraphrased_prompt,
        "created_at": s.created_at,
        "resolved_at": s.resolved_at,
    }


def create_app(
    config: ApiConfig | None = None,
    lexicon: Lexicon | None = None,
    clients: dict | None = None,
) -> FastAPI:
    """Build the service; ``clients`` may inject completion/t2i/vqa/paraphrase."""
    config = config or ApiConfig()
    lexicon = lexicon or default_lexicon()
    clients = dict(clients or {})

    def _client(name: str):
        if name in clients:
            return clients[name]
        from .clients import (
            CompletionClient, ParaphraseClient, T2IClient, VQAClient,
        )
        makers = {
            "completion": lambda: CompletionClient(config.lm_url, config.token),
            "t2i": lambda: T2IClient(config.t2i_url, config.token),
            "vqa": lambda: VQAClient(config.vqa_url, config.token),
            "paraphrase": lambda: ParaphraseClient(config.para_url, config.token),
        }
        clients[name] = makers[name]()
        return clients[name]

    app = FastAPI(title="promptlens service")
    store = ImageStore(Path(config.data_dir) / "images")

    benchmarks: dict[str, dict] = {}
    live_sessions: dict[str, sessions_mod.Session] = {}
    session_locks: dict[str, threading.Lock] = {}
    experiments: dict[str, _Experiment] = {}
    state_lock = threading.Lock()
    request_log: list[dict] = []
    app.state.request_log = request_log

    @app.middleware("http")
    async def _log_requests(request: Request, call_next):
        response = await call_next(request)
        request_log.append(
            {"method": request.method, "path": request.url.path, "status": response.status_code}
        )
        return response

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok"}

    @app.get("/debug/requests")
    def debug_requests() -> list[dict]:
        return request_log

    @app.post("/benchmarks", status_code=201)
    def post_benchmark(req: _BenchmarkRequest) -> dict:
        try:
            gen_config = GenerationConfig.from_dict(req.config)
            benchmark = generate_benchmark(gen_config, lexicon, req.seed)
        except (ValueError, GenerationError) as exc:
            raise _error(422, "bad_config", str(exc))
        benchmark_id = uuid.uuid4().hex[:12]
        with state_lock:
            benchmarks[benchmark_id] = {
                "benchmark": benchmark,
                "by_record_id": {r.prompt.id: r for r in benchmark.records},
            }
        return {
            "benchmark_id": benchmark_id,
            "n_records": len(benchmark.records),
            "seed": benchmark.seed,
            "config_hash": benchmark.config_hash,
        }

    def _benchmark(benchmark_id: str) -> dict:
        entry = benchmarks.get(benchmark_id)
        if entry is None:
            raise _error(404, "unknown_benchmark", f"no benchmark {benchmark_id!r}")
        return entry

    @app.get("/benchmarks/{benchmark_id}/records")
    def get_records(benchmark_id: str, offset: int = 0, limit: int = 100) -> dict:
        entry = _benchmark(benchmark_id)
        records = entry["benchmark"].records
        return {
            "total": len(records),
            "offset": offset,
            "records": [record_to_dict(r) for r in records[offset : offset + limit]],
        }

    @app.post("/sessions", status_code=201)
    def post_session(req: _SessionRequest) -> dict:
        entry = _benchmark(req.benchmark_id)
        record = entry["by_record_id"].get(req.record_id)
        if record is None:
            raise _error(404, "unknown_record", f"no record {req.record_id!r}")
        try:
            mode = FewShotMode(req.mode)
        except ValueError:
            raise _error(422, "bad_mode", f"unknown mode {req.mode!r}")
        if req.clarifier == "oracle":
            clarifier = lambda p, m: fallback_clarify(p, m, lexicon)
        elif req.clarifier == "model":
            clarifier = lambda p, m: clarify(
                p, m, default_shots(m), _client("completion"), DecodeParams()
            )
        else:
            raise _error(422, "bad_clarifier", f"unknown clarifier {req.clarifier!r}")
        try:
            session = sessions_mod.open_session(record, req.intention_index, mode, clarifier)
        except sessions_mod.SessionError as exc:
            raise _error(422, "bad_intention", str(exc))
        with state_lock:
            live_sessions[session.session_id] = session
            session_locks[session.session_id] = threading.Lock()
        return _session_to_dict(session)

    def _session(session_id: str) -> sessions_mod.Session:
        session = live_sessions.get(session_id)
        if session is None:
            raise _error(404, "unknown_session", f"no session {session_id!r}")
        return session

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str) -> dict:
        return _session_to_dict(_session(session_id))

    @app.post("/sessions/{session_id}/resolve")
    def post_resolve(session_id: str, req: _ResolveRequest) -> dict:
        session = _session(session_id)
        if req.action == "answer":
            if req.text is None:
                raise _error(422, "missing_text", "answer requires text")
            action = sessions_mod.Answer(req.text)
        elif req.action == "select":
            if req.index is None:
                raise _error(422, "missing_index", "select requires index")
            action = sessions_mod.Select(req.index)
        elif req.action == "skip":
            action = sessions_mod.Skip()
        else:
            raise _error(422, "bad_action", f"unknown action {req.action!r}")
        lock = session_locks[session_id]
        with lock:
            session = _session(session_id)
            if not session.pending:
                raise _error(409, "already_resolved", "session is already resolved")
            try:
                resolved = sessions_mod.resolve(session, action)
            except sessions_mod.SessionError as exc:
                raise _error(422, "bad_resolution", str(exc))
            live_sessions[session_id] = resolved
        return _session_to_dict(resolved)

    @app.post("/sessions/{session_id}/paraphrase")
    def post_paraphrase(session_id: str) -> dict:
        lock = session_locks.get(session_id)
        if lock is None:
            raise _error(404, "unknown_session", f"no session {session_id!r}")
        with lock:
            session = _session(session_id)
            try:
                updated = sessions_mod.paraphrase(session, _client("paraphrase"))
            except sessions_mod.SessionError as exc:
                raise _error(409, "not_resolved", str(exc))
            live_sessions[session_id] = updated
        return _session_to_dict(updated)

    @app.post("/experiments", status_code=202)
    def post_experiment(req: _ExperimentRequest) -> dict:
        chosen = []
        for session_id in req.session_ids:
            chosen.append(_session(session_id))
        for condition in req.conditions:
            if condition not in CONDITIONS:
                raise _error(422, "bad_condition", f"unknown condition {condition!r}")
        experiment_id = uuid.uuid4().hex[:12]
        active = [s for s in chosen if s.resolution.kind in ("answered", "selected")]
        record = _Experiment(total_prompts=len(active) * len(req.conditions))
        experiments[experiment_id] = record

        t2i = _client("t2i")

        class _Progress:
            def generate(self, prompt: str, n: int) -> list[bytes]:
                result = t2i.generate(prompt, n)
                record.completed_prompts += 1
                return result

        def runner() -> None:
            try:
                report = run_experiment(
                    chosen,
                    tuple(req.conditions),
                    _Progress(),
                    _client("vqa"),
                    n_images=req.n_images or config.n_images,
                    store=store,
                    question_source=req.question_source,
                    parallelism=config.parallelism,
                )
                record.report = report.to_dict()
                record.status = "done"
            except Exception as exc:  # surfaced via the status route
                record.error = str(exc)
                record.status = "error"

        threading.Thread(target=runner, daemon=True).start()
        return {"experiment_id": experiment_id, "status": record.status}

    @app.get("/experiments/{experiment_id}/report")
    def get_report(experiment_id: str) -> dict:
        record = experiments.get(experiment_id)
        if record is None:
            raise _error(404, "unknown_experiment", f"no experiment {experiment_id!r}")
        if record.status == "running":
            raise _error(
                409,
                "experiment_running",
                f"completed {record.completed_prompts}/{record.total_prompts} generations",
            )
        if record.status == "error":
            raise _error(500, "experiment_failed", record.error or "unknown failure")
        return record.report

    @app.get("/images/{content_hash}")
    def get_image(content_hash: str) -> Response:
        payload = store.get_by_hash(content_hash)
        if payload is None:
            raise _error(404, "unknown_image", f"no image {content_hash!r}")
        return Response(content=payload, media_type="image/png")

    return app


def serve(config: ApiConfig, lexicon: Lexicon | None = None) -> None:
    """Run the service with uvicorn (blocking)."""
    import uvicorn

    app = create_app(config, lexicon)
    uvicorn.run(app, host=config.host, port=config.port, log_level="warning")
