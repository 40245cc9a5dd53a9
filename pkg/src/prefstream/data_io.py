"""Synthetic dataset generators and CSV input/output.

Generators return datasets already normalized into the unit ball; CSV
loading normalizes on the way in and saving writes raw (denormalized)
values so that a saved file reloads to the same dataset.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .model import Dataset, normalize_dataset, random_unit_vector


def gen_sphere(n: int, d: int, seed: int = 0) -> Dataset:
    """n points drawn uniformly from the unit sphere in R^d."""
    if n < 1 or d < 1:
        raise ValueError("n and d must be positive")
    rng = np.random.default_rng(seed)
    pts = rng.standard_normal((n, d))
    norms = np.linalg.norm(pts, axis=1)
    norms[norms < 1e-12] = 1.0
    pts /= norms[:, None]
    return normalize_dataset(pts)


def gen_clusters(n: int, d: int, k: int = 5, sigma: float = 0.1, seed: int = 0) -> Dataset:
    """n points around k random unit-sphere centers with gaussian noise."""
    if n < 1 or d < 1 or k < 1:
        raise ValueError("n, d and k must be positive")
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    rng = np.random.default_rng(seed)
    centers = np.stack([random_unit_vector(d, rng) for _ in range(k)])
    assignment = rng.integers(0, k, size=n)
    pts = centers[assignment] + sigma * rng.standard_normal((n, d))
    return normalize_dataset(pts)


def read_csv(fh, id_column: str | None = None, source: str = "<csv>") -> Dataset:
    """Parse a headered CSV of numeric attributes from an open text stream.

    Every column is an attribute except the optional id column.  Parse
    problems are reported with their row and column so bad cells are easy
    to find.
    """
    reader = csv.reader(fh)
    try:
        header = next(reader)
    except StopIteration:
        raise ValueError(f"{source}: file is empty") from None
    header = [h.strip() for h in header]
    id_idx = None
    if id_column is not None:
        if id_column not in header:
            raise ValueError(f"{source}: id column '{id_column}' not found in header {header}")
        id_idx = header.index(id_column)
    attr_names = [h for i, h in enumerate(header) if i != id_idx]
    if not attr_names:
        raise ValueError(f"{source}: no attribute columns")
    rows: list[list[float]] = []
    ids: list[int | str] = []
    for lineno, raw in enumerate(reader, start=2):
        if not raw or all(not c.strip() for c in raw):
            continue
        if len(raw) != len(header):
            raise ValueError(
                f"{source}: row {lineno} has {len(raw)} values, expected {len(header)}"
            )
        vals = []
        for i, cell in enumerate(raw):
            if i == id_idx:
                continue
            try:
                v = float(cell)
            except ValueError:
                raise ValueError(
                    f"{source}: row {lineno}, column '{header[i]}': "
                    f"could not parse {cell!r} as a number"
                ) from None
            if not np.isfinite(v):
                raise ValueError(
                    f"{source}: row {lineno}, column '{header[i]}': non-finite value {cell!r}"
                )
            vals.append(v)
        rows.append(vals)
        ids.append(raw[id_idx].strip() if id_idx is not None else len(ids))
    if not rows:
        raise ValueError(f"{source}: no data rows")
    return normalize_dataset(rows, ids=ids, attributes=attr_names)


def load_csv(path: str | Path, id_column: str | None = None) -> Dataset:
    """Read a headered CSV file into a normalized dataset."""
    path = Path(path)
    with path.open(newline="") as fh:
        return read_csv(fh, id_column=id_column, source=str(path))


def save_csv(dataset: Dataset, path: str | Path, id_column: str = "id") -> None:
    """Write raw (denormalized) values; reloading reproduces the dataset."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([id_column, *dataset.attributes])
        for t in dataset:
            writer.writerow([t.id, *(repr(v) for v in dataset.raw_values(t))])
