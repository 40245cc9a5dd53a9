"""Streaming search for a near-best tuple under an unknown linear utility.

The stack, bottom to top: dense solvers (solvers), comparison-sample
pruning filters (filters), the single-pass engine (engine), dataset
generation and CSV handling (data_io), the benchmark harness and CLI
(bench, cli), and an HTTP session service for live human answerers
(service).
"""

from .engine import Disposition, EngineConfig, RunResult, StreamEngine, rand_baseline, run_stream
from .filters import (
    FilterKind,
    PairSetFilter,
    ProtocolError,
    SortedSampleFilter,
    TiedSampleFilter,
    make_filter,
)
from .model import (
    ComparisonOutcome,
    Dataset,
    SimOracle,
    TupleRecord,
    max_similar_subset_size,
    normalize_dataset,
    random_unit_vector,
    true_utility,
)
from .solvers import (
    FeasReport,
    FeasStatus,
    SolveReport,
    SolveStatus,
    convex_cone_ls,
    lin_feasible,
    nnls,
)

__all__ = [
    "ComparisonOutcome",
    "Dataset",
    "Disposition",
    "EngineConfig",
    "FeasReport",
    "FeasStatus",
    "FilterKind",
    "PairSetFilter",
    "ProtocolError",
    "RunResult",
    "SimOracle",
    "SolveReport",
    "SolveStatus",
    "SortedSampleFilter",
    "StreamEngine",
    "TiedSampleFilter",
    "TupleRecord",
    "convex_cone_ls",
    "lin_feasible",
    "make_filter",
    "max_similar_subset_size",
    "nnls",
    "normalize_dataset",
    "rand_baseline",
    "random_unit_vector",
    "run_stream",
    "true_utility",
]
