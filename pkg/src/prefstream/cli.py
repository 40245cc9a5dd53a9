"""Command line front end.

Subcommands: run (one benchmark run, JSON metrics on stdout), sweep (grid of
runs into a CSV), prune-half (sample-size probe), serve (HTTP session
service).  Exit codes: 0 on success, 1 on a run failure, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from .bench import (
    METRICS_COLUMNS,
    RunSpec,
    SweepSpec,
    prune_half_sample_size,
    run_once,
    sweep,
)

FILTER_CHOICES = ["list-qp", "list-lp", "pair-qp", "pair-lp", "hp-lp", "hp", "rand"]


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--filter", choices=FILTER_CHOICES, default="list-qp")
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--delta", type=float, default=0.0)
    p.add_argument("--pool-size", type=int, default=100)
    p.add_argument("--pool-frac", type=float, default=0.5)
    p.add_argument("--theory-mode", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--synthetic", choices=["sphere", "clusters"], default=None)
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--d", type=int, default=4)
    p.add_argument("--clusters", type=int, default=5)
    p.add_argument("--sigma", type=float, default=0.1)
    p.add_argument("--dataset", type=str, default=None, metavar="PATH")
    p.add_argument("--id-column", type=str, default=None, metavar="NAME")
    p.add_argument("--adjust-by-opt", action="store_true")
    p.add_argument("--out", type=str, default=None, metavar="PATH")
    p.add_argument("--format", choices=["json", "csv"], default="json")


def _write_rows(rows: list[dict], path: Path, fmt: str) -> None:
    if fmt == "json":
        path.write_text(json.dumps(rows if len(rows) > 1 else rows[0], indent=2) + "\n")
        return
    columns = list(METRICS_COLUMNS)
    extra = [k for k in rows[0] if k not in columns]
    columns.extend(extra)
    with path.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns)
        writer.writeheader()
        writer.writerows(rows)


def _cmd_run(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    if (args.synthetic is None) == (args.dataset is None):
        parser.error("exactly one of --synthetic or --dataset is required")
    spec = RunSpec(
        filter=args.filter,
        epsilon=args.epsilon,
        delta=args.delta,
        pool_size=args.pool_size,
        pool_frac=args.pool_frac,
        theory_mode=args.theory_mode,
        seed=args.seed,
        synthetic=args.synthetic,
        n=args.n,
        d=args.d,
        clusters=args.clusters,
        sigma=args.sigma,
        dataset_path=args.dataset,
        id_column=args.id_column,
        adjust_by_opt=args.adjust_by_opt,
    )
    try:
        row = run_once(spec)
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(json.dumps(row))
    if args.out:
        _write_rows([row], Path(args.out), args.format)
    return 0


def _cmd_sweep(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    spec = SweepSpec(
        filters=args.filters.split(","),
        n_list=[int(v) for v in args.n_list.split(",")],
        d_list=[int(v) for v in args.d_list.split(",")],
        epsilon_list=[float(v) for v in args.epsilon_list.split(",")],
        delta_list=[float(v) for v in args.delta_list.split(",")],
        trials=args.trials,
        seed=args.seed,
        synthetic=args.synthetic,
        clusters=args.clusters,
        sigma=args.sigma,
        pool_size=args.pool_size,
        pool_frac=args.pool_frac,
        theory_mode=args.theory_mode,
        adjust_by_opt=args.adjust_by_opt,
        workers=args.workers,
    )
    for f in spec.filters:
        if f not in FILTER_CHOICES:
            parser.error(f"unknown filter {f!r}")
    rows = sweep(spec)
    _write_rows(rows, Path(args.out), args.format)
    failures = sum(1 for r in rows if r["status"] != "ok")
    print(json.dumps({"rows": len(rows), "failures": failures, "out": args.out}))
    return 1 if failures else 0


def _cmd_prune_half(args: argparse.Namespace) -> int:
    result = prune_half_sample_size(
        d=args.d,
        epsilon=args.epsilon,
        n_eval=args.n_eval,
        trials=args.trials,
        seed=args.seed,
        cap=args.cap,
    )
    print(json.dumps({"d": args.d, "epsilon": args.epsilon, "size": result.size, "capped": result.capped}))
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    uvicorn.run("prefstream.service.app:app", host=args.host, port=args.port, log_level="info")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="prefstream")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="one benchmark run, JSON metrics on stdout")
    _add_run_flags(p_run)

    p_sweep = sub.add_parser("sweep", help="grid of runs written to CSV")
    p_sweep.add_argument("--filters", type=str, default="list-qp")
    p_sweep.add_argument("--n-list", type=str, default="1000")
    p_sweep.add_argument("--d-list", type=str, default="4")
    p_sweep.add_argument("--epsilon-list", type=str, default="0.1")
    p_sweep.add_argument("--delta-list", type=str, default="0.0")
    p_sweep.add_argument("--trials", type=int, default=1)
    p_sweep.add_argument("--seed", type=int, default=0)
    p_sweep.add_argument("--synthetic", choices=["sphere", "clusters"], default="sphere")
    p_sweep.add_argument("--clusters", type=int, default=5)
    p_sweep.add_argument("--sigma", type=float, default=0.1)
    p_sweep.add_argument("--pool-size", type=int, default=100)
    p_sweep.add_argument("--pool-frac", type=float, default=0.5)
    p_sweep.add_argument("--theory-mode", action="store_true")
    p_sweep.add_argument("--adjust-by-opt", action="store_true")
    p_sweep.add_argument("--workers", type=int, default=1)
    p_sweep.add_argument("--out", type=str, required=True, metavar="PATH")
    p_sweep.add_argument("--format", choices=["csv", "json"], default="csv")

    p_half = sub.add_parser("prune-half", help="smallest sample size pruning half of fresh tuples")
    p_half.add_argument("--d", type=int, required=True)
    p_half.add_argument("--epsilon", type=float, required=True)
    p_half.add_argument("--n-eval", type=int, default=400)
    p_half.add_argument("--trials", type=int, default=5)
    p_half.add_argument("--seed", type=int, default=0)
    p_half.add_argument("--cap", type=int, default=4096)

    p_serve = sub.add_parser("serve", help="start the HTTP session service")
    p_serve.add_argument("--host", type=str, default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)

    args = parser.parse_args(argv)
    if args.command == "run":
        return _cmd_run(args, parser)
    if args.command == "sweep":
        return _cmd_sweep(args, p_sweep)
    if args.command == "prune-half":
        return _cmd_prune_half(args)
    return _cmd_serve(args)


if __name__ == "__main__":
    sys.exit(main())
