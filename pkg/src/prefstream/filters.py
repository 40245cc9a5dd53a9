"""Pruning filters built from small comparison samples.

Each filter ingests stream tuples through add (spending oracle comparisons)
and then answers prune(x) with zero further comparisons: it decides from
geometry alone whether x is dominated, up to the filter's regret budget, by
what the filter has already seen.  Three families:

- SortedSampleFilter: a totally ordered sample; x is pruned when it lies
  within epsilon of the top tuple plus the cone of downhill consecutive
  differences.
- TiedSampleFilter: the tie-tolerant variant; group members gathered behind
  each representative, convex block over the top two groups, cone from
  differences between groups two ranks apart (adjacent ranks are skipped:
  with near-ties those differences could point uphill).
- PairSetFilter: independent comparison pairs; four prune modes ranging
  from a convex-plus-cone distance test to halfspace feasibility and a bare
  sign test.

All thresholds fail closed: when the backing solver cannot certify a prune,
the tuple is kept.
"""

from __future__ import annotations

from enum import Enum

import numpy as np

from .model import ComparisonOutcome, Oracle, TupleRecord
from .solvers import (
    FeasStatus,
    PRUNE_SLACK,
    cone_residual_below,
    lin_feasible,
    residual_below,
)


class ProtocolError(RuntimeError):
    """An oracle answer that the active filter cannot accept."""


class FilterKind(Enum):
    LIST_QP = "list-qp"
    LIST_LP = "list-lp"
    PAIR_QP = "pair-qp"
    PAIR_LP = "pair-lp"
    HP_LP = "hp-lp"
    HP = "hp"


class SortedSampleFilter:
    """Totally ordered sample with cone-distance pruning.

    QP mode prunes x when min over alpha >= 0 of
    ||x - x1 - sum_j alpha_j (x_{j+1} - x_j)||_2 is at most epsilon; LP mode
    demands exact cone membership (epsilon replaced by a small numerical
    tolerance).  The two modes share one code path with two thresholds.
    """

    def __init__(self, epsilon: float, exact: bool = False):
        if epsilon < 0:
            raise ValueError("epsilon must be nonnegative")
        self.epsilon = float(epsilon)
        self.exact = bool(exact)
        self.sample: list[TupleRecord] = []
        self.comparisons_used = 0
        self._diffs = np.zeros((0, 0))

    @property
    def threshold(self) -> float:
        return PRUNE_SLACK if self.exact else self.epsilon + PRUNE_SLACK

    @classmethod
    def from_sorted(
        cls, ordered: list[TupleRecord], epsilon: float, exact: bool = False
    ) -> "SortedSampleFilter":
        """Build directly from a best-to-worst ordered sample (no oracle)."""
        f = cls(epsilon, exact=exact)
        f.sample = list(ordered)
        f._rebuild()
        return f

    def _rebuild(self) -> None:
        if len(self.sample) >= 2:
            coords = np.stack([t.coords for t in self.sample])
            self._diffs = (coords[1:] - coords[:-1]).T
        else:
            d = self.sample[0].dim if self.sample else 0
            self._diffs = np.zeros((d, 0))

    def add(self, x: TupleRecord, oracle: Oracle) -> None:
        lo, hi = 0, len(self.sample)
        while lo < hi:
            mid = (lo + hi) // 2
            out = oracle.compare(x, self.sample[mid])
            self.comparisons_used += 1
            if out is ComparisonOutcome.Tie:
                raise ProtocolError("tie answer on a tie-free sorted sample")
            if out is ComparisonOutcome.FirstBetter:
                hi = mid
            else:
                lo = mid + 1
        self.sample.insert(lo, x)
        self._rebuild()

    def prune(self, x: TupleRecord) -> bool:
        if not self.sample:
            return False
        target = x.coords - self.sample[0].coords
        return residual_below(self._diffs, target, self.threshold)

    def best(self, oracle: Oracle) -> TupleRecord | None:
        return self.sample[0] if self.sample else None

    def size(self) -> int:
        return len(self.sample)


class TiedSampleFilter:
    """Sorted representatives with tie groups and a robust cone test.

    A tuple that ties its binary-search midpoint joins that representative's
    group instead of entering the order.  Pruning asks whether x sits within
    epsilon of a convex combination of the top two groups' members plus a
    nonnegative combination of member differences taken between groups two
    ranks apart; differences between consecutive ranks are never offered to
    the solver because a near-tie could make them point uphill.
    """

    def __init__(self, epsilon: float, exact: bool = False):
        if epsilon < 0:
            raise ValueError("epsilon must be nonnegative")
        self.epsilon = float(epsilon)
        self.exact = bool(exact)
        self.reps: list[TupleRecord] = []
        self.groups: list[list[TupleRecord]] = []
        self.comparisons_used = 0
        self._blocks: tuple[np.ndarray, np.ndarray] | None = None
        self.structure_version = 0

    @property
    def threshold(self) -> float:
        return PRUNE_SLACK if self.exact else self.epsilon + PRUNE_SLACK

    def add(self, x: TupleRecord, oracle: Oracle) -> None:
        lo, hi = 0, len(self.reps)
        while lo < hi:
            mid = (lo + hi) // 2
            out = oracle.compare(x, self.reps[mid])
            self.comparisons_used += 1
            if out is ComparisonOutcome.Tie:
                self.groups[mid].append(x)
                self._blocks = None
                return
            if out is ComparisonOutcome.FirstBetter:
                hi = mid
            else:
                lo = mid + 1
        self.reps.insert(lo, x)
        self.groups.insert(lo, [x])
        self._blocks = None
        self.structure_version += 1

    def assembled_blocks(self) -> tuple[np.ndarray, np.ndarray]:
        """Convex block V and cone block D currently offered to the solver."""
        if self._blocks is None:
            top = [t.coords for g in self.groups[:2] for t in g]
            V = np.stack(top).T if top else np.zeros((0, 0))
            cols = []
            for j in range(len(self.groups) - 2):
                for z in self.groups[j]:
                    for w in self.groups[j + 2]:
                        cols.append(w.coords - z.coords)
            d = self.reps[0].dim if self.reps else 0
            D = np.stack(cols).T if cols else np.zeros((d, 0))
            self._blocks = (V, D)
        return self._blocks

    def prune(self, x: TupleRecord) -> bool:
        if not self.reps:
            return False
        V, D = self.assembled_blocks()
        return cone_residual_below(V, D, x.coords, self.threshold)

    def best(self, oracle: Oracle) -> TupleRecord | None:
        return self.reps[0] if self.reps else None

    def size(self) -> int:
        return sum(len(g) for g in self.groups)


class PairSetFilter:
    """Disjoint comparison pairs with four prune modes.

    Pairs are formed from consecutive add calls (one comparison each); on a
    tie the newcomer is discarded and the first tuple stays pending.  With
    winners z and losers y:

    - PairQP: distance from x to {convex hull of all endpoints} + cone of
      loser-minus-winner directions, threshold epsilon / c_estimate.
    - PairLP: exact membership with the convex block restricted to winners.
    - HpLp: prune when no utility vector u satisfies u.(z - y) >= 1 and
      u.((1 - epsilon) x - z) >= 1 across all pairs.  The optional middle
      constraint u.(x - z) >= 1 is omitted by default.
    - Hp: prune when x.(z - y) < 0 for some pair.
    """

    def __init__(
        self,
        epsilon: float,
        mode: FilterKind,
        c_estimate: float = 1.0,
        include_middle_rows: bool = False,
    ):
        if mode not in (FilterKind.PAIR_QP, FilterKind.PAIR_LP, FilterKind.HP_LP, FilterKind.HP):
            raise ValueError("mode must be a pair-set kind")
        if epsilon < 0:
            raise ValueError("epsilon must be nonnegative")
        if not 0.0 < c_estimate <= 1.0:
            raise ValueError("c_estimate must lie in (0, 1]")
        self.epsilon = float(epsilon)
        self.mode = mode
        self.c_estimate = float(c_estimate)
        self.include_middle_rows = bool(include_middle_rows)
        self.pairs: list[tuple[TupleRecord, TupleRecord]] = []  # (winner, loser)
        self.pending: TupleRecord | None = None
        self.comparisons_used = 0
        self._winners = np.zeros((0, 0))
        self._endpoints = np.zeros((0, 0))
        self._down_dirs = np.zeros((0, 0))  # rows y - z
        self._up_rows = np.zeros((0, 0))  # rows z - y

    def _rebuild(self) -> None:
        if not self.pairs:
            return
        winners = np.stack([z.coords for z, _ in self.pairs])
        losers = np.stack([y.coords for _, y in self.pairs])
        self._winners = winners.T
        self._endpoints = np.concatenate([winners, losers]).T
        self._up_rows = winners - losers
        self._down_dirs = (losers - winners).T

    def add(self, x: TupleRecord, oracle: Oracle) -> None:
        if self.pending is None:
            self.pending = x
            return
        out = oracle.compare(self.pending, x)
        self.comparisons_used += 1
        if out is ComparisonOutcome.Tie:
            return  # newcomer discarded, pending kept
        if out is ComparisonOutcome.FirstBetter:
            pair = (self.pending, x)
        else:
            pair = (x, self.pending)
        self.pairs.append(pair)
        self.pending = None
        self._rebuild()

    def prune(self, x: TupleRecord) -> bool:
        if not self.pairs:
            return False
        if self.mode is FilterKind.HP:
            return bool(np.min(self._up_rows @ x.coords) < 0.0)
        if self.mode is FilterKind.HP_LP:
            rows = [self._up_rows, (1.0 - self.epsilon) * x.coords - self._winners.T]
            if self.include_middle_rows:
                rows.append(x.coords - self._winners.T)
            report = lin_feasible(np.concatenate(rows))
            return report.status is FeasStatus.Infeasible
        if self.mode is FilterKind.PAIR_QP:
            threshold = self.epsilon / self.c_estimate + PRUNE_SLACK
            return cone_residual_below(self._endpoints, self._down_dirs, x.coords, threshold)
        return cone_residual_below(self._winners, self._down_dirs, x.coords, PRUNE_SLACK)

    def best(self, oracle: Oracle) -> TupleRecord | None:
        candidates = [z for z, _ in self.pairs]
        if self.pending is not None:
            candidates.append(self.pending)
        if not candidates:
            return None
        incumbent = candidates[0]
        for c in candidates[1:]:
            out = oracle.compare(incumbent, c)
            self.comparisons_used += 1
            if out is ComparisonOutcome.SecondBetter:
                incumbent = c
        return incumbent

    def size(self) -> int:
        return 2 * len(self.pairs) + (1 if self.pending is not None else 0)


def make_filter(
    kind: FilterKind,
    epsilon: float,
    delta: float = 0.0,
    c_estimate: float = 1.0,
    include_middle_rows: bool = False,
):
    """Instantiate the concrete filter for a configuration.

    With delta > 0 the oracle can answer Tie, so list kinds switch to the
    tie-tolerant sample; pair kinds absorb ties in add directly.
    """
    if kind in (FilterKind.LIST_QP, FilterKind.LIST_LP):
        exact = kind is FilterKind.LIST_LP
        if delta > 0.0:
            return TiedSampleFilter(epsilon, exact=exact)
        return SortedSampleFilter(epsilon, exact=exact)
    return PairSetFilter(
        epsilon,
        kind,
        c_estimate=c_estimate,
        include_middle_rows=include_middle_rows,
    )
