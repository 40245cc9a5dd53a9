"""Resumable engine execution for pull-based comparison sessions.

The streaming engine calls its oracle synchronously, but an HTTP client
answers one comparison per request.  The bridge: the engine advances one
step at a time (a single stream tuple, or the final tournament), reading
answers from the session's log through a channel oracle that raises when
the log runs out.  A step that raises has already mutated the engine, so
every step that might consume answers runs against a snapshot and is
replayed from the log prefix once the missing answer arrives.  Replays are
deterministic, which also makes a whole session reproducible from
(dataset, config, seed, answer log) alone.
"""

from __future__ import annotations

import copy

import numpy as np

from ..engine import EngineConfig, StreamEngine
from ..filters import ProtocolError
from ..model import ComparisonOutcome, Dataset, TupleRecord


class ComparisonNeeded(Exception):
    """Raised inside a step when the answer log has no answer left."""

    def __init__(self, first: TupleRecord, second: TupleRecord):
        super().__init__("comparison needed")
        self.first = first
        self.second = second


class NoPendingQuery(RuntimeError):
    pass


class StaleAnswer(RuntimeError):
    pass


class ChannelOracle:
    """Replays scripted answers; demands a fresh one when they run out."""

    def __init__(self, script: list[ComparisonOutcome]):
        self.script = list(script)
        self.pos = 0
        self.query_count = 0
        self.tie_count = 0

    def compare(self, a: TupleRecord, b: TupleRecord) -> ComparisonOutcome:
        if self.pos >= len(self.script):
            raise ComparisonNeeded(a, b)
        out = self.script[self.pos]
        self.pos += 1
        self.query_count += 1
        if out is ComparisonOutcome.Tie:
            self.tie_count += 1
        return out


class SessionRunner:
    """Owns one session's engine, stream order, pending query and answer log."""

    def __init__(self, dataset: Dataset, config: EngineConfig):
        self.dataset = dataset
        self.config = config
        order = np.random.default_rng(config.seed).permutation(len(dataset))
        self.sequence = [dataset.tuples[int(i)] for i in order]
        self.engine = StreamEngine(config, ChannelOracle([]), n=len(dataset))
        self.cursor = 0
        self.answer_log: list[ComparisonOutcome] = []
        self._step_start = 0
        self.pending: tuple[TupleRecord, TupleRecord] | None = None
        self.winner: TupleRecord | None = None
        self.stopped = False

    @property
    def done(self) -> bool:
        return self.winner is not None

    @property
    def seq(self) -> int:
        """Sequence number of the pending query: answers already consumed."""
        return len(self.answer_log)

    def advance(self) -> None:
        """Run engine steps until a comparison is needed or the run ends."""
        while self.winner is None:
            streaming = self.cursor < len(self.sequence) and not self.stopped
            script = self.answer_log[self._step_start :]
            if streaming and not script and len(self.engine.pool) < self.engine.pool_cap:
                # Pool-fill and sealed-prune steps never query; skip the snapshot.
                self.engine.process(self.sequence[self.cursor])
                self.cursor += 1
                continue
            snapshot = copy.deepcopy(self.engine)
            self.engine.oracle = ChannelOracle(script)
            try:
                if streaming:
                    self.engine.process(self.sequence[self.cursor])
                    self.cursor += 1
                else:
                    self.winner = self.engine.finalize()
                self._step_start = len(self.answer_log)
            except ComparisonNeeded as need:
                self.engine = snapshot
                self.pending = (need.first, need.second)
                return
            except ProtocolError:
                self.engine = snapshot
                raise
        self.pending = None

    def submit_answer(self, outcome: ComparisonOutcome, seq: int | None = None) -> None:
        if self.pending is None:
            raise NoPendingQuery("no comparison is awaiting an answer")
        if seq is not None and seq != self.seq:
            raise StaleAnswer(f"answer targets query {seq}, current is {self.seq}")
        prior = self.pending
        self.answer_log.append(outcome)
        self.pending = None
        try:
            self.advance()
        except ProtocolError:
            # The answer was unusable (a tie against a tie-free sample);
            # drop it and restore the query so the client can answer again.
            self.answer_log.pop()
            self.pending = prior
            raise

    def stop(self) -> None:
        """Abandon the rest of the stream and move to the final tournament.

        Answers consumed by a half-finished step are discarded so the log
        stays an exact transcript of completed engine queries.
        """
        if self.done or self.stopped:
            self.stopped = True
            return
        if self.pending is not None:
            del self.answer_log[self._step_start :]
            self.pending = None
        self.stopped = True
        self.advance()

    def progress(self) -> dict:
        eng = self.engine
        return {
            "tuples_seen": eng.tuples_seen,
            "tuples_pruned": eng.tuples_pruned,
            "comparisons_used": len(self.answer_log),
            "filters_built": eng.filters_built,
            "pool_fill": len(eng.pool),
            "total": len(self.dataset),
        }
