"""HTTP session service: a live comparison loop for human answerers.

One session owns one engine run.  The client polls GET query for the next
pair, posts an answer, and repeats until done; progress and the final
result have their own endpoints, and stop abandons the rest of the stream
(the final tournament still runs, so the anytime guarantee is kept).
Sessions are held in memory, serialized per session, and expire after an
idle timeout.  All errors use one body shape: {code, message}.
"""

from __future__ import annotations

import io
import os
import threading
import time
import uuid
from dataclasses import dataclass, field as dc_field
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from ..data_io import gen_clusters, gen_sphere, read_csv
from ..engine import EngineConfig
from ..filters import FilterKind, ProtocolError
from ..model import ComparisonOutcome, Dataset, TupleRecord, normalize_dataset
from .runner import NoPendingQuery, SessionRunner, StaleAnswer
from .schemas import (
    AnswerRequest,
    AnswerResponse,
    CreateSessionRequest,
    CreateSessionResponse,
    DatasetIn,
    ErrorBody,
    ProgressResponse,
    QueryResponse,
    ResultResponse,
    StopResponse,
    TupleView,
)

DEFAULT_SESSION_TTL = 3600.0

OUTCOME_BY_NAME = {
    "first": ComparisonOutcome.FirstBetter,
    "second": ComparisonOutcome.SecondBetter,
    "tie": ComparisonOutcome.Tie,
}
NAME_BY_OUTCOME = {v: k for k, v in OUTCOME_BY_NAME.items()}


class ApiError(Exception):
    def __init__(self, status_code: int, code: str, message: str):
        super().__init__(message)
        self.status_code = status_code
        self.code = code
        self.message = message


@dataclass
class Session:
    runner: SessionRunner
    ttl: float
    last_access: float = dc_field(default_factory=time.monotonic)
    lock: threading.Lock = dc_field(default_factory=threading.Lock)


_sessions: dict[str, Session] = {}
_store_lock = threading.Lock()

app = FastAPI(title="prefstream session service")

_ui_dir = os.environ.get("PREFSTREAM_UI_DIR", "frontend/dist")
if Path(_ui_dir).is_dir():
    app.mount("/ui", StaticFiles(directory=_ui_dir, html=True), name="ui")


@app.exception_handler(ApiError)
async def _api_error_handler(request: Request, exc: ApiError) -> JSONResponse:
    return JSONResponse(
        status_code=exc.status_code,
        content=ErrorBody(code=exc.code, message=exc.message).model_dump(),
    )


@app.exception_handler(RequestValidationError)
async def _validation_handler(request: Request, exc: RequestValidationError) -> JSONResponse:
    return JSONResponse(
        status_code=422,
        content=ErrorBody(code="validation_error", message=str(exc.errors())).model_dump(),
    )


def reset_store() -> None:
    """Drop all sessions (test helper)."""
    with _store_lock:
        _sessions.clear()


def _build_dataset(spec: DatasetIn) -> Dataset:
    provided = [spec.csv_text is not None, spec.rows is not None, spec.synthetic is not None]
    if sum(provided) != 1:
        raise ApiError(400, "invalid_dataset", "provide exactly one of csv_text, rows, synthetic")
    try:
        if spec.csv_text is not None:
            return read_csv(io.StringIO(spec.csv_text), id_column=spec.id_column, source="upload")
        if spec.rows is not None:
            return normalize_dataset(spec.rows, ids=spec.ids, attributes=spec.attributes)
        syn = spec.synthetic
        if syn.kind == "sphere":
            return gen_sphere(syn.n, syn.d, seed=syn.data_seed)
        return gen_clusters(syn.n, syn.d, k=syn.clusters, sigma=syn.sigma, seed=syn.data_seed)
    except ValueError as exc:
        raise ApiError(400, "invalid_dataset", str(exc)) from exc


def _get_session(session_id: str) -> Session:
    with _store_lock:
        sess = _sessions.get(session_id)
        if sess is None:
            raise ApiError(404, "session_not_found", f"no session {session_id!r}")
        now = time.monotonic()
        if now - sess.last_access > sess.ttl:
            del _sessions[session_id]
            raise ApiError(410, "session_expired", f"session {session_id!r} expired")
        sess.last_access = now
        return sess


def _tuple_view(dataset: Dataset, t: TupleRecord) -> TupleView:
    values = dataset.raw_values(t)
    return TupleView(id=t.id, attributes=dict(zip(dataset.attributes, values)))


def _state(runner: SessionRunner) -> str:
    return "done" if runner.done else "awaiting_answer"


@app.post("/sessions", response_model=CreateSessionResponse, status_code=201)
def create_session(body: CreateSessionRequest) -> CreateSessionResponse:
    dataset = _build_dataset(body.dataset)
    try:
        config = EngineConfig(
            filter_kind=FilterKind(body.config.filter),
            epsilon=body.config.epsilon,
            delta=body.config.delta,
            pool_size=body.config.pool_size,
            pool_frac=body.config.pool_frac,
            theory_mode=body.config.theory_mode,
            seed=body.config.seed,
        )
    except ValueError as exc:
        raise ApiError(400, "invalid_config", str(exc)) from exc
    runner = SessionRunner(dataset, config)
    runner.advance()
    session_id = uuid.uuid4().hex
    ttl = body.ttl_seconds if body.ttl_seconds is not None else DEFAULT_SESSION_TTL
    with _store_lock:
        _sessions[session_id] = Session(runner=runner, ttl=ttl)
    return CreateSessionResponse(id=session_id)


@app.get("/sessions/{session_id}/query", response_model=QueryResponse)
def next_query(session_id: str) -> QueryResponse:
    sess = _get_session(session_id)
    with sess.lock:
        runner = sess.runner
        if runner.done:
            return QueryResponse(status="done")
        first, second = runner.pending
        return QueryResponse(
            status="awaiting_answer",
            seq=runner.seq,
            first=_tuple_view(runner.dataset, first),
            second=_tuple_view(runner.dataset, second),
        )


@app.post("/sessions/{session_id}/answer", response_model=AnswerResponse)
def submit_answer(session_id: str, body: AnswerRequest) -> AnswerResponse:
    sess = _get_session(session_id)
    with sess.lock:
        runner = sess.runner
        try:
            runner.submit_answer(OUTCOME_BY_NAME[body.outcome], seq=body.seq)
        except NoPendingQuery as exc:
            raise ApiError(409, "no_pending_query", str(exc)) from exc
        except StaleAnswer as exc:
            raise ApiError(409, "stale_answer", str(exc)) from exc
        except ProtocolError as exc:
            raise ApiError(422, "invalid_outcome", str(exc)) from exc
        return AnswerResponse(state=_state(runner))


@app.get("/sessions/{session_id}/progress", response_model=ProgressResponse)
def progress(session_id: str) -> ProgressResponse:
    sess = _get_session(session_id)
    with sess.lock:
        runner = sess.runner
        return ProgressResponse(state=_state(runner), stopped=runner.stopped, **runner.progress())


@app.get("/sessions/{session_id}/result", response_model=ResultResponse)
def result(session_id: str) -> ResultResponse:
    sess = _get_session(session_id)
    with sess.lock:
        runner = sess.runner
        if not runner.done:
            raise ApiError(409, "not_finished", "session has no result yet")
        stats = runner.progress()
        return ResultResponse(
            winner=_tuple_view(runner.dataset, runner.winner),
            comparisons=len(runner.answer_log),
            answer_log=[NAME_BY_OUTCOME[o] for o in runner.answer_log],
            stopped_early=runner.stopped,
            tuples_seen=stats["tuples_seen"],
            tuples_pruned=stats["tuples_pruned"],
            filters_built=stats["filters_built"],
        )


@app.post("/sessions/{session_id}/stop", response_model=StopResponse)
def stop(session_id: str) -> StopResponse:
    sess = _get_session(session_id)
    with sess.lock:
        runner = sess.runner
        runner.stop()
        return StopResponse(state=_state(runner), stopped=runner.stopped)
