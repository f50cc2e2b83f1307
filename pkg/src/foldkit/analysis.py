"""Reconstruction-error metrics, rank-slack quantities, and theorem checks.

For a weight matrix W and retained rank k this module compares three
compressions: magnitude pruning W_p, the constructive singleton fold
W'_f at rank k+1 (all pruned rows merged into one extra cluster), and
the optimal k-means fold W*_f. The dominance chain

    ||W - W_p||_F^2  >=  ||W - W'_f||_F^2  >=  ||W - W*_f||_F^2

is checked machine-exactly (up to 1e-9 relative tolerance) for every
rank, and the rank-slack quantities delta_rank / delta_method quantify
how much of folding's advantage comes from the +1 rank versus from the
richer projection family.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .clustering import exact_fold_wcss_all_k, kmeans_exact, kmeans_hartigan
from .compress import magnitude_order, magnitude_select, singleton_fold
from .errors import InvalidBudgetError
from .projection import fold_rows, identity_assignment
from .validation import check_same_shape, check_weight_matrix

CHAIN_TOL_SCALE = 1e-9


def recon_error_sq(w: np.ndarray, w_hat: np.ndarray) -> float:
    """Squared Frobenius distance, accumulated with exact (fsum) summation
    in row-major order for cross-platform reproducibility."""
    w = check_weight_matrix(w)
    w_hat = check_weight_matrix(w_hat)
    check_same_shape(w, w_hat)
    d = (w - w_hat).ravel()
    return math.fsum((d * d).tolist())


def frob_sq(w: np.ndarray) -> float:
    """Squared Frobenius norm of ``w``."""
    w = check_weight_matrix(w)
    v = w.ravel()
    return math.fsum((v * v).tolist())


def prune_errors_all_k(w: np.ndarray, criterion: str) -> np.ndarray:
    """err_prune_sq(k) for k = 0..m as suffix sums over the magnitude order.

    Nestedness of magnitude selection makes this array non-increasing.
    """
    w = check_weight_matrix(w)
    order = magnitude_order(w, criterion)
    row_sq = (w * w).sum(axis=1)[order]
    suffix = np.concatenate([np.cumsum(row_sq[::-1])[::-1], [0.0]])
    return np.maximum(suffix, 0.0)


def singleton_error_sq(w: np.ndarray, criterion: str, k_p: int) -> float:
    """Error of the singleton fold paired with magnitude pruning at k_p,
    computed directly through the fold projection."""
    sel = magnitude_select(w, k_p, criterion)
    a = identity_assignment(w.shape[0]) if sel.rank == sel.m else singleton_fold(sel)
    return recon_error_sq(w, fold_rows(a, w))


def singleton_closed_form(w: np.ndarray, criterion: str, k_p: int) -> float:
    """Closed-form singleton-fold error: sum of squared pruned rows minus
    (#pruned) times the squared mean of the pruned rows."""
    w = check_weight_matrix(w)
    sel = magnitude_select(w, k_p, criterion)
    pruned = list(sel.pruned)
    if not pruned:
        return 0.0
    rows = w[pruned]
    mu = rows.mean(axis=0)
    sq = math.fsum((rows * rows).ravel().tolist())
    return sq - len(pruned) * math.fsum((mu * mu).tolist())


def _optfold_error_sq(
    w: np.ndarray,
    k_f: int,
    criterion: str,
    seed: int,
    exact: bool,
    max_sweeps: int,
    warm_singleton: bool = True,
) -> float:
    """Optimal-fold error at rank k_f, via the exact oracle or Hartigan.

    Without the oracle, Hartigan is warm-started from the singleton
    assignment of the matching pruning (k_p = k_f - 1): since a sweep
    never increases WCSS, the result provably stays below the singleton
    error and preserves the dominance chain.
    """
    m = w.shape[0]
    if k_f == m:
        return 0.0
    if exact:
        return kmeans_exact(w, k_f).wcss
    init = None
    if warm_singleton:
        init = singleton_fold(magnitude_select(w, k_f - 1, criterion))
    res = kmeans_hartigan(w, k_f, seed=seed, max_sweeps=max_sweeps, init=init)
    return recon_error_sq(w, fold_rows(res.assignment, w))


def delta_rank(w: np.ndarray, criterion: str, k: int) -> float:
    """Relative Frobenius-error gain from raising the pruning rank k -> k+1.

    Nonnegative by nestedness of magnitude selection.
    """
    w = check_weight_matrix(w)
    m = w.shape[0]
    if not 0 <= k <= m - 1:
        raise InvalidBudgetError(f"k={k} out of [0, {m - 1}]")
    errs = prune_errors_all_k(w, criterion)
    norm = math.sqrt(frob_sq(w))
    if norm == 0.0:
        return 0.0
    return (math.sqrt(errs[k]) - math.sqrt(errs[k + 1])) / norm


def delta_method(
    w: np.ndarray,
    criterion: str,
    k: int,
    seed: int = 0,
    exact: bool = False,
    max_sweeps: int = 10,
) -> float:
    """Relative error gain from switching pruning -> optimal folding at the
    same rank k. Sign is empirical, never asserted."""
    w = check_weight_matrix(w)
    m = w.shape[0]
    if not 1 <= k <= m:
        raise InvalidBudgetError(f"k={k} out of [1, {m}]")
    err_p = float(prune_errors_all_k(w, criterion)[k])
    err_f = _optfold_error_sq(w, k, criterion, seed, exact, max_sweeps, warm_singleton=False)
    norm = math.sqrt(frob_sq(w))
    if norm == 0.0:
        return 0.0
    return (math.sqrt(err_p) - math.sqrt(err_f)) / norm


@dataclass(frozen=True)
class RankVerdict:
    """Chain check at one pruning rank k_p (folds evaluated at k_p + 1)."""

    k: int
    err_prune_sq: float
    err_singleton_sq: float
    err_optfold_sq: float
    ok_prune_vs_singleton: bool
    ok_singleton_vs_optfold: bool

    @property
    def ok(self) -> bool:
        return self.ok_prune_vs_singleton and self.ok_singleton_vs_optfold


def verify_theorems(
    w: np.ndarray,
    criterion: str = "l2",
    exact: bool = False,
    seed: int = 0,
    rank_stride: int = 1,
    max_sweeps: int = 10,
) -> list[RankVerdict]:
    """Check the dominance chain at every (strided) rank k_p in [0, m-1].

    With exact=True the optimal fold comes from the enumeration oracle
    (m <= 12); otherwise from Hartigan warm-started at the singleton
    assignment, which still guarantees the chain.
    """
    w = check_weight_matrix(w)
    m = w.shape[0]
    prune_errs = prune_errors_all_k(w, criterion)
    exact_table = exact_fold_wcss_all_k(w) if exact else None
    verdicts = []
    for k_p in range(0, m, max(1, rank_stride)):
        err_p = float(prune_errs[k_p])
        err_s = singleton_error_sq(w, criterion, k_p)
        if exact_table is not None:
            err_o = exact_table[k_p + 1]
        else:
            err_o = _optfold_error_sq(w, k_p + 1, criterion, seed, False, max_sweeps)
        tol = CHAIN_TOL_SCALE * max(1.0, err_p)
        verdicts.append(
            RankVerdict(
                k=k_p,
                err_prune_sq=err_p,
                err_singleton_sq=err_s,
                err_optfold_sq=err_o,
                ok_prune_vs_singleton=err_p >= err_s - tol,
                ok_singleton_vs_optfold=err_s >= err_o - tol,
            )
        )
    return verdicts


@dataclass(frozen=True)
class RankRecord:
    k: int
    err_prune_sq: float
    err_singleton_sq: float
    err_optfold_sq: float
    rel_prune: float
    rel_singleton: float
    rel_optfold: float
    delta_rank: float
    delta_method: float
    chain_ok: bool


@dataclass(frozen=True)
class RankSweepReport:
    """Per-rank reconstruction errors, slack quantities, and chain verdicts."""

    layer_name: str
    criterion: str
    frob_norm_sq: float
    rows: tuple[RankRecord, ...] = field(default=())


def sweep_report(
    w: np.ndarray,
    criterion: str = "l2",
    seed: int = 0,
    exact: bool = False,
    layer_name: str = "layer",
    rank_stride: int = 1,
    max_sweeps: int = 10,
) -> RankSweepReport:
    """Assemble the full per-rank report for one weight matrix.

    One row per pruning rank k in [0, m-1]; singleton/optimal folds are
    evaluated at rank k+1 (the theorem slack), delta_method at matched
    rank k (undefined at k=0, reported as NaN).
    """
    w = check_weight_matrix(w)
    m = w.shape[0]
    total = frob_sq(w)
    norm = math.sqrt(total)
    prune_errs = prune_errors_all_k(w, criterion)
    exact_table = exact_fold_wcss_all_k(w) if exact else None

    def rel(err: float) -> float:
        return err / total if total > 0 else 0.0

    rows = []
    for k in range(0, m, max(1, rank_stride)):
        err_p = float(prune_errs[k])
        err_s = singleton_error_sq(w, criterion, k)
        if exact_table is not None:
            err_o = exact_table[k + 1]
            err_matched = exact_table[k] if k >= 1 else None
        else:
            err_o = _optfold_error_sq(w, k + 1, criterion, seed, False, max_sweeps)
            err_matched = (
                _optfold_error_sq(w, k, criterion, seed, False, max_sweeps, warm_singleton=False)
                if k >= 1
                else None
            )
        d_rank = (math.sqrt(err_p) - math.sqrt(float(prune_errs[k + 1]))) / norm if norm > 0 else 0.0
        if err_matched is None:
            d_method = math.nan
        elif norm > 0:
            d_method = (math.sqrt(err_p) - math.sqrt(err_matched)) / norm
        else:
            d_method = 0.0
        tol = CHAIN_TOL_SCALE * max(1.0, err_p)
        rows.append(
            RankRecord(
                k=k,
                err_prune_sq=err_p,
                err_singleton_sq=err_s,
                err_optfold_sq=err_o,
                rel_prune=rel(err_p),
                rel_singleton=rel(err_s),
                rel_optfold=rel(err_o),
                delta_rank=d_rank,
                delta_method=d_method,
                chain_ok=(err_p >= err_s - tol) and (err_s >= err_o - tol),
            )
        )
    return RankSweepReport(
        layer_name=layer_name, criterion=criterion, frob_norm_sq=total, rows=tuple(rows)
    )


CSV_HEADER = [
    "layer",
    "k",
    "crit",
    "err_prune_sq",
    "err_singleton_sq",
    "err_optfold_sq",
    "rel_prune",
    "rel_singleton",
    "rel_optfold",
    "delta_rank",
    "delta_method",
    "chain_ok",
]


def _fmt(x: float) -> str:
    return format(x, ".17g")


def write_report_csv(report: RankSweepReport, path: str) -> None:
    """Serialize a report; floats carry 17 significant digits."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for r in report.rows:
            writer.writerow(
                [
                    report.layer_name,
                    r.k,
                    report.criterion,
                    _fmt(r.err_prune_sq),
                    _fmt(r.err_singleton_sq),
                    _fmt(r.err_optfold_sq),
                    _fmt(r.rel_prune),
                    _fmt(r.rel_singleton),
                    _fmt(r.rel_optfold),
                    _fmt(r.delta_rank),
                    _fmt(r.delta_method),
                    "true" if r.chain_ok else "false",
                ]
            )


def read_report_csv(path: str) -> list[dict]:
    """Parse a report CSV back into typed row dicts."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != CSV_HEADER:
            raise ValueError(f"unexpected CSV header in {path}: {reader.fieldnames}")
        rows = []
        for rec in reader:
            row = {"layer": rec["layer"], "k": int(rec["k"]), "crit": rec["crit"]}
            for key in CSV_HEADER[3:-1]:
                row[key] = float(rec[key])
            row["chain_ok"] = rec["chain_ok"] == "true"
            rows.append(row)
        return rows
