"""Benchmark harness: single runs, grid sweeps, and sample-size probes.

Every run is reproducible from its flags plus one master seed: the seed is
split into independent child seeds for data generation, the hidden utility
draw, and the stream shuffle.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .data_io import gen_clusters, gen_sphere, load_csv
from .engine import EngineConfig, rand_baseline, run_stream
from .filters import FilterKind, SortedSampleFilter
from .model import Dataset, SimOracle, TupleRecord, random_unit_vector, true_utility

RAND_BASELINE_K = 50

METRICS_COLUMNS = [
    "filter",
    "source",
    "n",
    "d",
    "epsilon",
    "delta",
    "seed",
    "pool_size",
    "pool_frac",
    "theory_mode",
    "adjust_by_opt",
    "status",
    "winner_id",
    "comparisons",
    "ties",
    "filters_built",
    "peak_memory_tuples",
    "tuples_seen",
    "tuples_pruned",
    "regret_true",
    "opt_utility",
    "runtime_ms",
    "timestamp",
    "error",
]


@dataclass
class RunSpec:
    """Everything one benchmark run needs, flags plus master seed."""

    filter: str = "list-qp"
    epsilon: float = 0.1
    delta: float = 0.0
    pool_size: int = 100
    pool_frac: float = 0.5
    theory_mode: bool = False
    seed: int = 0
    synthetic: str | None = "sphere"
    n: int = 1000
    d: int = 4
    clusters: int = 5
    sigma: float = 0.1
    dataset_path: str | None = None
    id_column: str | None = None
    adjust_by_opt: bool = False


def _child_seeds(seed: int) -> tuple[int, int, int]:
    ss = np.random.SeedSequence(seed)
    data_s, u_s, shuffle_s = ss.spawn(3)
    return (
        int(data_s.generate_state(1)[0]),
        int(u_s.generate_state(1)[0]),
        int(shuffle_s.generate_state(1)[0]),
    )


def build_dataset(spec: RunSpec, data_seed: int) -> Dataset:
    if spec.dataset_path is not None:
        return load_csv(spec.dataset_path, id_column=spec.id_column)
    if spec.synthetic == "sphere":
        return gen_sphere(spec.n, spec.d, seed=data_seed)
    if spec.synthetic == "clusters":
        return gen_clusters(spec.n, spec.d, k=spec.clusters, sigma=spec.sigma, seed=data_seed)
    raise ValueError(f"unknown synthetic generator {spec.synthetic!r}")


def run_once(spec: RunSpec) -> dict:
    """One benchmark run; returns a flat metrics row."""
    data_seed, u_seed, shuffle_seed = _child_seeds(spec.seed)
    dataset = build_dataset(spec, data_seed)
    u = random_unit_vector(dataset.dim, np.random.default_rng(u_seed))
    oracle = SimOracle(u, delta=spec.delta)
    utils = dataset.coords_matrix() @ u
    opt_utility = float(utils.max())

    if spec.filter == "rand":
        result = rand_baseline(dataset, oracle, k=RAND_BASELINE_K, seed=shuffle_seed)
    else:
        kind = FilterKind(spec.filter)
        epsilon = spec.epsilon
        c_estimate = 1.0
        if spec.adjust_by_opt and opt_utility > 0.0:
            # Simulation-only calibration against the known optimum: list
            # kinds tighten their regret budget to epsilon * util(x*), the
            # pair QP test widens its threshold to epsilon / util(x*).
            if kind in (FilterKind.LIST_QP, FilterKind.LIST_LP):
                epsilon = epsilon * opt_utility
            elif kind is FilterKind.PAIR_QP:
                c_estimate = min(1.0, opt_utility)
        config = EngineConfig(
            filter_kind=kind,
            epsilon=epsilon,
            delta=spec.delta,
            pool_size=spec.pool_size,
            pool_frac=spec.pool_frac,
            theory_mode=spec.theory_mode,
            seed=shuffle_seed,
            c_estimate=c_estimate,
        )
        result = run_stream(dataset, config, oracle)

    return {
        "filter": spec.filter,
        "source": spec.dataset_path or spec.synthetic,
        "n": len(dataset),
        "d": dataset.dim,
        "epsilon": spec.epsilon,
        "delta": spec.delta,
        "seed": spec.seed,
        "pool_size": spec.pool_size,
        "pool_frac": spec.pool_frac,
        "theory_mode": spec.theory_mode,
        "adjust_by_opt": spec.adjust_by_opt,
        "status": "ok",
        "winner_id": result.winner.id,
        "comparisons": result.comparisons,
        "ties": result.ties,
        "filters_built": result.filters_built,
        "peak_memory_tuples": result.peak_memory_tuples,
        "tuples_seen": result.tuples_seen,
        "tuples_pruned": result.tuples_pruned,
        "regret_true": result.regret_true,
        "opt_utility": opt_utility,
        "runtime_ms": result.runtime_ms,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S"),
        "error": "",
    }


def _run_once_guarded(spec: RunSpec) -> dict:
    try:
        return run_once(spec)
    except Exception as exc:  # noqa: BLE001 - a sweep must survive bad cells
        row = {c: "" for c in METRICS_COLUMNS}
        row.update(
            {
                "filter": spec.filter,
                "source": spec.dataset_path or spec.synthetic,
                "n": spec.n,
                "d": spec.d,
                "epsilon": spec.epsilon,
                "delta": spec.delta,
                "seed": spec.seed,
                "status": "error",
                "error": f"{type(exc).__name__}: {exc}",
                "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S"),
            }
        )
        return row


@dataclass
class SweepSpec:
    filters: list[str] = field(default_factory=lambda: ["list-qp"])
    n_list: list[int] = field(default_factory=lambda: [1000])
    d_list: list[int] = field(default_factory=lambda: [4])
    epsilon_list: list[float] = field(default_factory=lambda: [0.1])
    delta_list: list[float] = field(default_factory=lambda: [0.0])
    trials: int = 1
    seed: int = 0
    synthetic: str = "sphere"
    clusters: int = 5
    sigma: float = 0.1
    pool_size: int = 100
    pool_frac: float = 0.5
    theory_mode: bool = False
    adjust_by_opt: bool = False
    workers: int = 1


def sweep(spec: SweepSpec) -> list[dict]:
    """Full grid of runs, one row per cell and trial, plus per-cell stats.

    Rows keep grid order regardless of worker count.  A failing cell is
    recorded with status=error and does not stop the sweep.
    """
    cells = [
        (f, n, d, eps, delta)
        for f in spec.filters
        for n in spec.n_list
        for d in spec.d_list
        for eps in spec.epsilon_list
        for delta in spec.delta_list
    ]
    specs = []
    for cell in cells:
        f, n, d, eps, delta = cell
        for trial in range(spec.trials):
            specs.append(
                RunSpec(
                    filter=f,
                    epsilon=eps,
                    delta=delta,
                    pool_size=spec.pool_size,
                    pool_frac=spec.pool_frac,
                    theory_mode=spec.theory_mode,
                    seed=spec.seed + trial,
                    synthetic=spec.synthetic,
                    n=n,
                    d=d,
                    clusters=spec.clusters,
                    sigma=spec.sigma,
                    adjust_by_opt=spec.adjust_by_opt,
                )
            )
    if spec.workers > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            rows = list(pool.map(_run_once_guarded, specs))
    else:
        rows = [_run_once_guarded(s) for s in specs]

    # Per-cell mean and standard error, repeated on each of the cell's rows.
    for start in range(0, len(rows), spec.trials):
        group = rows[start : start + spec.trials]
        for key in ("comparisons", "regret_true"):
            vals = [float(r[key]) for r in group if r["status"] == "ok" and r[key] != ""]
            mean = float(np.mean(vals)) if vals else ""
            stderr = float(np.std(vals, ddof=1) / np.sqrt(len(vals))) if len(vals) > 1 else ""
            for r in group:
                r[f"cell_mean_{key}"] = mean
                r[f"cell_stderr_{key}"] = stderr
    return rows


class PruneHalfResult(NamedTuple):
    size: int
    capped: bool


def _prune_fraction(
    d: int,
    epsilon: float,
    size: int,
    n_eval: int,
    trial_seeds: list[int],
) -> float:
    """Mean share of fresh sphere tuples pruned by a size-`size` sorted sample.

    Each trial draws one hidden utility and one master sample sequence; the
    filter is built from the first `size` sample points, so the measured
    fraction is nondecreasing in `size` trial by trial.
    """
    fractions = []
    for ts in trial_seeds:
        # Separate generators so the evaluation set is fixed per trial and
        # a larger sample strictly extends a smaller one.
        rng_sample = np.random.default_rng(ts)
        rng_eval = np.random.default_rng(ts + 1)
        u = random_unit_vector(d, rng_sample)
        pts = rng_sample.standard_normal((size, d))
        pts /= np.linalg.norm(pts, axis=1)[:, None]
        sample = [TupleRecord(i, p) for i, p in enumerate(pts)]
        sample.sort(key=lambda t: true_utility(u, t), reverse=True)
        f = SortedSampleFilter.from_sorted(sample, epsilon)
        fresh = rng_eval.standard_normal((n_eval, d))
        fresh /= np.linalg.norm(fresh, axis=1)[:, None]
        pruned = sum(1 for p in fresh if f.prune(TupleRecord(-1, p)))
        fractions.append(pruned / n_eval)
    return float(np.mean(fractions))


def prune_half_sample_size(
    d: int,
    epsilon: float,
    n_eval: int = 400,
    trials: int = 5,
    seed: int = 0,
    cap: int = 4096,
) -> PruneHalfResult:
    """Smallest sorted-sample size that prunes at least half of fresh tuples.

    Doubling search for an upper bound, then binary search inside the last
    doubling interval.  Returns the cap with capped=True when even the cap
    falls short of the one-half target.
    """
    ss = np.random.SeedSequence(seed)
    trial_seeds = [int(s.generate_state(1)[0]) for s in ss.spawn(trials)]

    def hit(size: int) -> bool:
        return _prune_fraction(d, epsilon, size, n_eval, trial_seeds) >= 0.5

    lo, size = 0, 1
    while size < cap and not hit(size):
        lo, size = size, size * 2
    size = min(size, cap)
    if not hit(size):
        return PruneHalfResult(cap, True)
    hi = size
    while lo + 1 < hi:
        mid = (lo + hi) // 2
        if hit(mid):
            hi = mid
        else:
            lo = mid
    return PruneHalfResult(hi, False)
