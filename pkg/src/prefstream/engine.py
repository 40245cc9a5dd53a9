"""Single-pass streaming engine around the pruning filters.

The stream is consumed in a seeded random order.  Arriving tuples first run
the gauntlet of sealed filters (pure geometry, zero comparisons).  Survivors
fill a holding pool; once the pool is full they are added to the active
filter, and after every add the pool is re-tested against that filter.  When
the filter can prune at least a pool_frac share of the pool it is sealed,
the pruned pool tuples are dropped, and a fresh filter starts.  The final
answer is a sequential tournament over each filter's best tuple plus the
remaining pool, so an approximately best tuple is available at any moment.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .filters import FilterKind, TiedSampleFilter, make_filter
from .model import ComparisonOutcome, Dataset, Oracle, TupleRecord, true_utility


class Disposition(Enum):
    PrunedBySealed = "pruned_by_sealed"
    Pooled = "pooled"
    AddedToActive = "added_to_active"
    SealedActive = "sealed_active"


@dataclass
class EngineConfig:
    filter_kind: FilterKind = FilterKind.LIST_QP
    epsilon: float = 0.1
    delta: float = 0.0
    pool_size: int = 100
    pool_frac: float = 0.5
    theory_mode: bool = False
    seed: int = 0
    c_estimate: float = 1.0
    include_middle_rows: bool = False

    def __post_init__(self) -> None:
        if isinstance(self.filter_kind, str):
            self.filter_kind = FilterKind(self.filter_kind)
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError("epsilon must lie in (0, 1)")
        if self.delta < 0.0:
            raise ValueError("delta must be nonnegative")
        if self.pool_size < 1:
            raise ValueError("pool_size must be at least 1")
        if not 0.0 < self.pool_frac <= 1.0:
            raise ValueError("pool_frac must lie in (0, 1]")
        if not 0.0 < self.c_estimate <= 1.0:
            raise ValueError("c_estimate must lie in (0, 1]")

    def effective_pool(self, n: int) -> tuple[int, float]:
        """Pool size and seal fraction, with theory-mode overrides.

        The analysed constants depend on whether the oracle can tie: 64 ln(2n)
        with seal fraction 5/8 without ties, 256 ln(2n) with 3/16 under ties.
        """
        if not self.theory_mode:
            return self.pool_size, self.pool_frac
        if self.delta > 0.0:
            return max(1, math.ceil(256.0 * math.log(2 * max(n, 1)))), 3.0 / 16.0
        return max(1, math.ceil(64.0 * math.log(2 * max(n, 1)))), 5.0 / 8.0


@dataclass
class RunResult:
    winner: TupleRecord
    comparisons: int
    ties: int
    filters_built: int
    peak_memory_tuples: int
    tuples_seen: int
    tuples_pruned: int
    regret_true: float | None
    runtime_ms: float


class StreamEngine:
    """Resumable core of the single-pass search.

    The engine itself is oblivious to where tuples come from; callers feed
    them one at a time through process and close with finalize.  All oracle
    comparisons happen inside add/best calls, never inside prune.
    """

    def __init__(self, config: EngineConfig, oracle: Oracle, n: int):
        self.config = config
        self.oracle = oracle
        self.n = int(n)
        self.pool_cap, self.seal_frac = config.effective_pool(self.n)
        self.sealed: list = []
        self.active = self._new_filter()
        self.pool: list[TupleRecord] = []
        self._pool_flags: list[bool] = []
        self._tied_version = 0
        self._sealed_sizes = 0
        self.tuples_seen = 0
        self.tuples_pruned = 0
        self.peak_memory_tuples = 0
        self.done = False

    def _new_filter(self):
        return make_filter(
            self.config.filter_kind,
            self.config.epsilon,
            delta=self.config.delta,
            c_estimate=self.config.c_estimate,
            include_middle_rows=self.config.include_middle_rows,
        )

    def _track_memory(self) -> None:
        current = len(self.pool) + self.active.size() + self._sealed_sizes
        if current > self.peak_memory_tuples:
            self.peak_memory_tuples = current

    def _pool_test(self) -> list[bool]:
        # Prune verdicts of the growing filter are monotone for sorted-sample
        # and pair-set filters (their certificate sets only grow with each
        # add), so pool tuples already pruned stay pruned and are not
        # re-solved.  The tie-tolerant filter loses that property whenever a
        # new representative enters (the top-two groups and the rank-skipping
        # difference pairs are reshuffled), so its cached verdicts are
        # invalidated on every structure change.
        f = self.active
        if isinstance(f, TiedSampleFilter) and f.structure_version != self._tied_version:
            self._pool_flags = [False] * len(self.pool)
            self._tied_version = f.structure_version
        for i, y in enumerate(self.pool):
            if not self._pool_flags[i]:
                self._pool_flags[i] = f.prune(y)
        return self._pool_flags

    def process(self, x: TupleRecord) -> Disposition:
        if self.done:
            raise RuntimeError("engine already finalized")
        self.tuples_seen += 1
        for f in self.sealed:
            if f.prune(x):
                self.tuples_pruned += 1
                self._track_memory()
                return Disposition.PrunedBySealed
        if len(self.pool) < self.pool_cap:
            self.pool.append(x)
            self._pool_flags.append(False)
            self._track_memory()
            return Disposition.Pooled
        self.active.add(x, self.oracle)
        flags = self._pool_test()
        pruned = sum(flags)
        disposition = Disposition.AddedToActive
        if pruned >= self.seal_frac * len(self.pool):
            self.sealed.append(self.active)
            self._sealed_sizes += self.active.size()
            self.pool = [y for y, fl in zip(self.pool, flags) if not fl]
            self._pool_flags = [False] * len(self.pool)
            self.tuples_pruned += pruned
            self.active = self._new_filter()
            self._tied_version = 0
            disposition = Disposition.SealedActive
        self._track_memory()
        return disposition

    def _tournament(self, candidates: list[TupleRecord]) -> TupleRecord:
        if not candidates:
            raise RuntimeError("no candidates to pick a winner from")
        incumbent = candidates[0]
        for c in candidates[1:]:
            out = self.oracle.compare(incumbent, c)
            if out is ComparisonOutcome.SecondBetter:
                incumbent = c
        return incumbent

    def _candidates(self, filters: list) -> list[TupleRecord]:
        picks = []
        for f in filters:
            b = f.best(self.oracle)
            if b is not None:
                picks.append(b)
        picks.extend(self.pool)
        return picks

    def best_so_far(self) -> TupleRecord:
        """Current winner estimate; spends comparisons but mutates nothing."""
        return self._tournament(self._candidates(self.sealed + [self.active]))

    def finalize(self) -> TupleRecord:
        self.sealed.append(self.active)
        self._sealed_sizes += self.active.size()
        winner = self._tournament(self._candidates(self.sealed))
        self.done = True
        return winner

    @property
    def filters_built(self) -> int:
        filters = self.sealed if self.done else self.sealed + [self.active]
        return sum(1 for f in filters if f.size() > 0)

    def progress(self) -> dict:
        return {
            "tuples_seen": self.tuples_seen,
            "tuples_pruned": self.tuples_pruned,
            "comparisons_used": self.oracle.query_count,
            "filters_built": self.filters_built,
            "pool_fill": len(self.pool),
        }


def _true_regret(dataset: Dataset, winner: TupleRecord, u: np.ndarray | None) -> float | None:
    if u is None:
        return None
    utils = dataset.coords_matrix() @ u
    best = float(utils.max())
    if best == 0.0:
        return None
    return (best - true_utility(u, winner)) / best


def run_stream(dataset: Dataset, config: EngineConfig, oracle: Oracle) -> RunResult:
    """Run the whole pipeline over a seeded random order of the dataset."""
    start = time.perf_counter()
    q0, t0 = oracle.query_count, oracle.tie_count
    rng = np.random.default_rng(config.seed)
    order = rng.permutation(len(dataset))
    engine = StreamEngine(config, oracle, n=len(dataset))
    for i in order:
        engine.process(dataset.tuples[int(i)])
    winner = engine.finalize()
    runtime_ms = (time.perf_counter() - start) * 1000.0
    return RunResult(
        winner=winner,
        comparisons=oracle.query_count - q0,
        ties=oracle.tie_count - t0,
        filters_built=engine.filters_built,
        peak_memory_tuples=engine.peak_memory_tuples,
        tuples_seen=engine.tuples_seen,
        tuples_pruned=engine.tuples_pruned,
        regret_true=_true_regret(dataset, winner, getattr(oracle, "u", None)),
        runtime_ms=runtime_ms,
    )


def rand_baseline(
    dataset: Dataset,
    oracle: Oracle,
    k: int = 50,
    seed: int = 0,
) -> RunResult:
    """Tournament over k uniformly sampled tuples, as a naive baseline."""
    start = time.perf_counter()
    q0, t0 = oracle.query_count, oracle.tie_count
    rng = np.random.default_rng(seed)
    k_eff = min(k, len(dataset))
    idx = rng.choice(len(dataset), size=k_eff, replace=False)
    candidates = [dataset.tuples[int(i)] for i in idx]
    incumbent = candidates[0]
    for c in candidates[1:]:
        if oracle.compare(incumbent, c) is ComparisonOutcome.SecondBetter:
            incumbent = c
    runtime_ms = (time.perf_counter() - start) * 1000.0
    return RunResult(
        winner=incumbent,
        comparisons=oracle.query_count - q0,
        ties=oracle.tie_count - t0,
        filters_built=0,
        peak_memory_tuples=k_eff,
        tuples_seen=k_eff,
        tuples_pruned=0,
        regret_true=_true_regret(dataset, incumbent, getattr(oracle, "u", None)),
        runtime_ms=runtime_ms,
    )
