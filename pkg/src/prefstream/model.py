"""Core data model: tuples, datasets, and pairwise comparison oracles.

A tuple is a point in R^d.  Datasets are normalized into the unit ball by
uniform scaling so that distances and utility gaps are comparable across
inputs.  A hidden linear utility u (unit vector) ranks tuples; the only way
any algorithm in this package may access u is through a comparison oracle
answering "which of these two tuples is better".
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Protocol, Sequence

import numpy as np


class ComparisonOutcome(Enum):
    """Answer to a pairwise comparison query."""

    FirstBetter = "first"
    SecondBetter = "second"
    Tie = "tie"


@dataclass(eq=False)
class TupleRecord:
    """One data tuple: an opaque id plus its normalized coordinates."""

    id: int | str
    coords: np.ndarray

    def __post_init__(self) -> None:
        self.coords = np.asarray(self.coords, dtype=float)
        if self.coords.ndim != 1:
            raise ValueError("tuple coordinates must be a 1-d vector")

    @property
    def dim(self) -> int:
        return int(self.coords.shape[0])


@dataclass
class Dataset:
    """A normalized collection of tuples.

    scale is the uniform divisor applied to every raw coordinate vector:
    the maximum original L2 norm, or 1.0 if all inputs already fit in the
    unit ball.  Raw values are recovered as coords * scale.  attributes
    holds one display name per coordinate (CSV headers, or generated).
    """

    tuples: list[TupleRecord]
    scale: float = 1.0
    attributes: list[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        if not self.tuples:
            raise ValueError("dataset must contain at least one tuple")
        d = self.tuples[0].dim
        for t in self.tuples:
            if t.dim != d:
                raise ValueError("all tuples must share one dimension")
        if not self.attributes:
            self.attributes = [f"x{i}" for i in range(d)]
        if len(self.attributes) != d:
            raise ValueError("attribute names must match dimension")

    @property
    def dim(self) -> int:
        return self.tuples[0].dim

    def __len__(self) -> int:
        return len(self.tuples)

    def __iter__(self):
        return iter(self.tuples)

    def coords_matrix(self) -> np.ndarray:
        return np.stack([t.coords for t in self.tuples])

    def raw_values(self, t: TupleRecord) -> list[float]:
        return [float(v * self.scale) for v in t.coords]


def normalize_dataset(
    rows: Sequence[Sequence[float]] | np.ndarray,
    ids: Sequence[int | str] | None = None,
    attributes: Sequence[str] | None = None,
) -> Dataset:
    """Scale raw rows uniformly into the unit ball.

    Every row is divided by the same factor (the maximum row norm, when it
    exceeds 1) so that relative geometry is preserved; there is no centering
    or per-axis scaling.
    """
    arr = np.asarray(rows, dtype=float)
    if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] == 0:
        raise ValueError("rows must form a nonempty 2-d array")
    if not np.all(np.isfinite(arr)):
        raise ValueError("rows contain non-finite values")
    norms = np.linalg.norm(arr, axis=1)
    max_norm = float(norms.max())
    scale = max_norm if max_norm > 1.0 else 1.0
    coords = arr / scale
    if ids is None:
        ids = list(range(arr.shape[0]))
    if len(ids) != arr.shape[0]:
        raise ValueError("ids must match the number of rows")
    tuples = [TupleRecord(i, c) for i, c in zip(ids, coords)]
    return Dataset(tuples, scale=scale, attributes=list(attributes) if attributes else [])


def true_utility(u: np.ndarray, x: TupleRecord | np.ndarray) -> float:
    """Ground-truth linear utility u.x (test and reporting use only)."""
    coords = x.coords if isinstance(x, TupleRecord) else np.asarray(x, dtype=float)
    return float(np.dot(u, coords))


def random_unit_vector(d: int, rng: np.random.Generator) -> np.ndarray:
    """Draw a direction uniformly from the unit sphere in R^d."""
    while True:
        v = rng.standard_normal(d)
        n = np.linalg.norm(v)
        if n > 1e-12:
            return v / n


class Oracle(Protocol):
    """Anything that can answer pairwise comparison queries."""

    query_count: int
    tie_count: int

    def compare(self, a: TupleRecord, b: TupleRecord) -> ComparisonOutcome: ...


class SimOracle:
    """Simulated comparison oracle around a hidden unit utility vector.

    With delta > 0 the oracle cannot distinguish tuples whose utilities are
    within delta and answers Tie.  With delta = 0 ties are disabled: an
    exact utility equality deterministically reports FirstBetter, so the
    induced order is total (though not antisymmetric on exactly equal
    utilities, an event of measure zero for continuous data).
    """

    def __init__(self, u: np.ndarray, delta: float = 0.0):
        u = np.asarray(u, dtype=float)
        n = np.linalg.norm(u)
        if not np.isfinite(n) or n <= 0.0:
            raise ValueError("utility vector must be nonzero and finite")
        if delta < 0.0:
            raise ValueError("delta must be nonnegative")
        self.u = u / n
        self.delta = float(delta)
        self.query_count = 0
        self.tie_count = 0

    def compare(self, a: TupleRecord, b: TupleRecord) -> ComparisonOutcome:
        if a.dim != b.dim or a.dim != self.u.shape[0]:
            raise ValueError("dimension mismatch in comparison")
        self.query_count += 1
        diff = float(np.dot(self.u, a.coords) - np.dot(self.u, b.coords))
        if self.delta > 0.0 and abs(diff) <= self.delta:
            self.tie_count += 1
            return ComparisonOutcome.Tie
        if diff >= 0.0:
            return ComparisonOutcome.FirstBetter
        return ComparisonOutcome.SecondBetter


def max_similar_subset_size(dataset: Dataset | Iterable[TupleRecord], u: np.ndarray, delta: float) -> int:
    """Size of the largest subset whose utilities pairwise differ by <= delta.

    Pairwise similarity under a linear utility is an interval condition, so
    the answer is the widest window of the sorted utility sequence whose
    spread is at most delta.
    """
    tuples = list(dataset.tuples if isinstance(dataset, Dataset) else dataset)
    if not tuples:
        return 0
    utils = np.sort(np.array([true_utility(u, t) for t in tuples]))
    best = 1
    lo = 0
    for hi in range(len(utils)):
        while utils[hi] - utils[lo] > delta:
            lo += 1
        best = max(best, hi - lo + 1)
    return best
