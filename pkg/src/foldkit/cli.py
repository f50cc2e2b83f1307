"""Command-line front-end: compress, sweep, verify, demo.

Exit codes: 0 success, 1 verified-property failure, 2 usage/input error.
Human-readable output goes to stdout, machine artifacts to files.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from . import analysis, compress, matrixio, toynet
from .errors import FoldkitError
from .projection import ClusterAssignment

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_USAGE = 2

FOLD_EQUIV_TOL = 1e-9


def _add_common(sub):
    sub.add_argument("--input", required=True, help="checkpoint manifest JSON")
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--criterion", choices=compress.CRITERIA, default="l2")
    sub.add_argument("--exact", action="store_true", help="use the exact clustering oracle (m <= 12)")
    sub.add_argument("--max-sweeps", type=int, default=10)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="foldkit",
        description="Structured pruning and model folding as orthogonal projections.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p_compress = subs.add_parser("compress", help="compress a checkpoint")
    _add_common(p_compress)
    p_compress.add_argument("--out", required=True, help="output directory")
    p_compress.add_argument("--ratio", type=float, required=True, help="retained fraction in (0, 1]")
    p_compress.add_argument("--method", choices=compress.METHODS, default="fold")
    p_compress.add_argument("--restarts", type=int, default=1)
    p_compress.add_argument("--rank-mode", choices=compress.RANK_MODES, default="matched")

    p_sweep = subs.add_parser("sweep", help="per-rank error report CSVs")
    _add_common(p_sweep)
    p_sweep.add_argument("--out", required=True, help="output directory")
    p_sweep.add_argument("--rank-stride", type=int, default=1)

    p_verify = subs.add_parser("verify", help="check the dominance theorems on every layer")
    _add_common(p_verify)
    p_verify.add_argument("--rank-stride", type=int, default=1)

    p_demo = subs.add_parser("demo", help="toy-net fold equivalence and loss perturbation")
    p_demo.add_argument("--dims", default="8,16,4", help="comma-separated layer sizes")
    p_demo.add_argument("--k", type=int, default=4, help="fold cluster count for the first hidden layer")
    p_demo.add_argument("--seed", type=int, default=0)
    return parser


def _validate(args) -> None:
    if getattr(args, "ratio", None) is not None and not 0 < args.ratio <= 1:
        raise ValueError(f"--ratio must be in (0, 1], got {args.ratio}")
    if getattr(args, "restarts", 1) < 1:
        raise ValueError("--restarts must be >= 1")
    if getattr(args, "max_sweeps", 1) < 1:
        raise ValueError("--max-sweeps must be >= 1")
    if getattr(args, "rank_stride", 1) < 1:
        raise ValueError("--rank-stride must be >= 1")


def cmd_compress(args) -> int:
    ckpt = matrixio.load_checkpoint(args.input)
    t0 = time.perf_counter()
    out, meta = compress.compress_checkpoint(
        ckpt,
        ratio=args.ratio,
        method=args.method,
        seed=args.seed,
        criterion=args.criterion,
        exact=args.exact,
        max_sweeps=args.max_sweeps,
        restarts=args.restarts,
        rank_mode=args.rank_mode,
    )
    elapsed = time.perf_counter() - t0
    matrixio.save_checkpoint(out, args.out)
    with open(os.path.join(args.out, "metadata.json"), "w") as fh:
        json.dump(meta, fh, indent=2)
        fh.write("\n")
    print(f"method={args.method} ratio={args.ratio} ({elapsed:.3f}s)")
    print(f"{'layer':<20} {'m -> k':<12} {'error_sq':<24}")
    for rec in meta["per_layer"]:
        print(f"{rec['name']:<20} {rec['m']} -> {rec['k']:<7} {rec['error_sq']:.6e}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    ckpt = matrixio.load_checkpoint(args.input)
    os.makedirs(args.out, exist_ok=True)
    for name, _next in ckpt.adjacency:
        w = ckpt.arrays[name]
        report = analysis.sweep_report(
            w,
            criterion=args.criterion,
            seed=args.seed,
            exact=args.exact,
            layer_name=name,
            rank_stride=args.rank_stride,
            max_sweeps=args.max_sweeps,
        )
        path = os.path.join(args.out, f"{name}.csv")
        analysis.write_report_csv(report, path)
        n_ok = sum(r.chain_ok for r in report.rows)
        print(f"{name}: {len(report.rows)} ranks, chain_ok {n_ok}/{len(report.rows)} -> {path}")
    return EXIT_OK


def cmd_verify(args) -> int:
    ckpt = matrixio.load_checkpoint(args.input)
    failures = 0
    for name, _next in ckpt.adjacency:
        w = ckpt.arrays[name]
        verdicts = analysis.verify_theorems(
            w,
            criterion=args.criterion,
            exact=args.exact,
            seed=args.seed,
            rank_stride=args.rank_stride,
            max_sweeps=args.max_sweeps,
        )
        bad = [v for v in verdicts if not v.ok]
        failures += len(bad)
        print(f"{name}: {len(verdicts) - len(bad)}/{len(verdicts)} ranks pass")
        for v in bad:
            if not v.ok_prune_vs_singleton:
                print(
                    f"  VIOLATION layer={name} k={v.k} prune_vs_singleton "
                    f"lhs={v.err_prune_sq:.17g} rhs={v.err_singleton_sq:.17g}"
                )
            if not v.ok_singleton_vs_optfold:
                print(
                    f"  VIOLATION layer={name} k={v.k} singleton_vs_optfold "
                    f"lhs={v.err_singleton_sq:.17g} rhs={v.err_optfold_sq:.17g}"
                )
    return EXIT_VIOLATION if failures else EXIT_OK


def cmd_demo(args) -> int:
    try:
        dims = [int(tok) for tok in args.dims.split(",")]
    except ValueError as exc:
        raise ValueError(f"--dims must be comma-separated integers: {args.dims!r}") from exc
    if len(dims) < 3:
        raise ValueError("--dims needs at least input, hidden, output sizes")
    if not 1 <= args.k <= dims[1]:
        raise ValueError(f"--k must be in [1, {dims[1]}]")

    net = toynet.random_mlp(dims, seed=args.seed)
    rng = np.random.default_rng(args.seed + 1)
    batch = toynet.EvalBatch(
        inputs=rng.uniform(-1.0, 1.0, size=(32, dims[0])),
        targets=rng.uniform(-1.0, 1.0, size=(32, dims[-1])),
    )
    labels = rng.integers(args.k, size=dims[1])
    labels[: args.k] = np.arange(args.k)  # keep every cluster nonempty
    assignment = ClusterAssignment(labels=labels, k=args.k)

    deviation = toynet.fold_equivalence_check(net, 0, assignment, batch)
    print(f"net dims {dims}, fold k={args.k} on layer 0")
    print(f"merge equivalence max deviation: {deviation:.3e}")
    for method in ("mag2", "singleton-fold", "fold"):
        rep = toynet.loss_perturbation(net, 0, method, args.k, batch, seed=args.seed)
        print(
            f"{method:<16} param_dist={rep['param_dist']:.6e} "
            f"loss_delta={rep['loss_delta']:.6e}"
        )
    if deviation > FOLD_EQUIV_TOL:
        print(f"equivalence breach: {deviation:.3e} > {FOLD_EQUIV_TOL}", file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_USAGE
    handlers = {
        "compress": cmd_compress,
        "sweep": cmd_sweep,
        "verify": cmd_verify,
        "demo": cmd_demo,
    }
    try:
        _validate(args)
        return handlers[args.command](args)
    except (FoldkitError, FileNotFoundError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
