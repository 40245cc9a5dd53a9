"""Request and response bodies of the session service."""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, Field


class SessionConfigIn(BaseModel):
    filter: Literal["list-qp", "list-lp", "pair-qp", "pair-lp", "hp-lp", "hp"] = "list-qp"
    epsilon: float = Field(default=0.1, gt=0.0, lt=1.0)
    delta: float = Field(default=0.0, ge=0.0, description="> 0 declares that answers may tie")
    pool_size: int = Field(default=100, ge=1)
    pool_frac: float = Field(default=0.5, gt=0.0, le=1.0)
    theory_mode: bool = False
    seed: int = 0


class SyntheticIn(BaseModel):
    kind: Literal["sphere", "clusters"] = "sphere"
    n: int = Field(ge=1)
    d: int = Field(ge=1)
    clusters: int = Field(default=5, ge=1)
    sigma: float = Field(default=0.1, ge=0.0)
    data_seed: int = 0


class DatasetIn(BaseModel):
    """Exactly one of csv_text, rows, or synthetic."""

    csv_text: str | None = None
    id_column: str | None = None
    rows: list[list[float]] | None = None
    ids: list[int | str] | None = None
    attributes: list[str] | None = None
    synthetic: SyntheticIn | None = None


class CreateSessionRequest(BaseModel):
    dataset: DatasetIn
    config: SessionConfigIn = SessionConfigIn()
    ttl_seconds: float | None = Field(default=None, gt=0.0)


class CreateSessionResponse(BaseModel):
    id: str


class TupleView(BaseModel):
    id: int | str
    attributes: dict[str, float]


class QueryResponse(BaseModel):
    status: Literal["awaiting_answer", "done"]
    seq: int | None = None
    first: TupleView | None = None
    second: TupleView | None = None


class AnswerRequest(BaseModel):
    outcome: Literal["first", "second", "tie"]
    seq: int | None = Field(default=None, description="guards against answering a stale query")


class AnswerResponse(BaseModel):
    state: Literal["awaiting_answer", "done"]


class ProgressResponse(BaseModel):
    state: Literal["awaiting_answer", "done"]
    tuples_seen: int
    tuples_pruned: int
    comparisons_used: int
    filters_built: int
    pool_fill: int
    total: int
    stopped: bool


class ResultResponse(BaseModel):
    winner: TupleView
    comparisons: int
    answer_log: list[Literal["first", "second", "tie"]]
    stopped_early: bool
    tuples_seen: int
    tuples_pruned: int
    filters_built: int


class StopResponse(BaseModel):
    state: Literal["awaiting_answer", "done"]
    stopped: bool


class ErrorBody(BaseModel):
    code: str
    message: str
