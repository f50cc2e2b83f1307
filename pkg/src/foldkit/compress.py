"""Layer-level compression operators and the checkpoint orchestrator.

Magnitude pruning drops the lowest-norm rows; folding clusters rows and
replaces each cluster by its mean. Both come with a next-layer
adaptation that turns the projected layer into a genuinely smaller
network: pruned output columns are dropped from the successor, folded
output columns are summed within clusters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .clustering import kmeans_exact, kmeans_hartigan, init_assignment
from .errors import InvalidBudgetError, ShapeError
from .projection import (
    ClusterAssignment,
    PruneSelection,
    cluster_means,
    identity_assignment,
)
from .matrixio import Checkpoint
from .validation import check_chainable, check_weight_matrix

CRITERIA = ("l1", "l2")
METHODS = ("mag1", "mag2", "fold", "singleton-fold")
RANK_MODES = ("matched", "theorem-slack")


def row_norms(w: np.ndarray, criterion: str) -> np.ndarray:
    """Per-row L1 or L2 magnitudes."""
    if criterion not in CRITERIA:
        raise ValueError(f"criterion must be one of {CRITERIA}, got {criterion!r}")
    if criterion == "l1":
        return np.abs(w).sum(axis=1)
    return np.sqrt((w * w).sum(axis=1))


def magnitude_order(w: np.ndarray, criterion: str) -> np.ndarray:
    """Row indices by descending magnitude; ties keep the lower index first.

    Budgets k and k+1 select nested prefixes of this fixed order.
    """
    w = check_weight_matrix(w)
    norms = row_norms(w, criterion)
    return np.argsort(-norms, kind="stable")


def magnitude_select(w: np.ndarray, k_p: int, criterion: str = "l2") -> PruneSelection:
    """Retain the k_p rows of largest magnitude under the given criterion."""
    w = check_weight_matrix(w)
    m = w.shape[0]
    if not 0 <= k_p <= m:
        raise InvalidBudgetError(f"k_p={k_p} out of [0, {m}]")
    order = magnitude_order(w, criterion)
    retained = tuple(sorted(int(i) for i in order[:k_p]))
    return PruneSelection(retained=retained, m=m)


def singleton_fold(sel: PruneSelection) -> ClusterAssignment:
    """Constructive fold matching a pruning: one cluster holds all pruned
    rows, each retained row stays a singleton; rank k_f = k_p + 1."""
    if sel.rank == sel.m:
        raise InvalidBudgetError("nothing pruned: singleton fold requires k_p <= m - 1")
    labels = np.zeros(sel.m, dtype=np.int64)
    for c, idx in enumerate(sel.retained, start=1):
        labels[idx] = c
    return ClusterAssignment(labels=labels, k=sel.rank + 1)


def optimal_fold(
    w: np.ndarray,
    k_f: int,
    seed: int = 0,
    exact: bool = False,
    max_sweeps: int = 10,
    restarts: int = 1,
    init: ClusterAssignment | None = None,
) -> ClusterAssignment:
    """Fold basis from k-means: exact enumeration or Hartigan local search.

    With restarts > 1 the best-WCSS run wins; ties go to the lowest
    restart index.
    """
    w = check_weight_matrix(w)
    if exact:
        return kmeans_exact(w, k_f).assignment
    if init is not None:
        return kmeans_hartigan(w, k_f, seed=seed, max_sweeps=max_sweeps, init=init).assignment
    best = None
    for r in range(max(1, restarts)):
        res = kmeans_hartigan(w, k_f, seed=seed + r, max_sweeps=max_sweeps)
        if best is None or res.wcss < best.wcss:
            best = res
    return best.assignment


@dataclass(frozen=True)
class CompressedLayerPair:
    """A layer and its successor after prune-drop or fold-merge.

    The dimension contract next.cols == layer.rows == k_eff always holds.
    """

    layer: np.ndarray
    next: np.ndarray
    mode: str  # "pruned" | "folded"
    mapping: PruneSelection | ClusterAssignment

    def __post_init__(self):
        if self.next.shape[1] != self.layer.shape[0]:
            raise ShapeError(
                f"contract violated: next has {self.next.shape[1]} cols, "
                f"layer has {self.layer.shape[0]} rows"
            )

    @property
    def k_eff(self) -> int:
        return self.layer.shape[0]


def prune_drop_pair(w: np.ndarray, nxt: np.ndarray, sel: PruneSelection) -> CompressedLayerPair:
    """Physically remove pruned rows of ``w`` and the matching columns of ``nxt``."""
    w = check_weight_matrix(w)
    nxt = check_weight_matrix(nxt)
    check_chainable(w, nxt)
    if sel.m != w.shape[0]:
        raise ShapeError(f"selection covers {sel.m} rows, matrix has {w.shape[0]}")
    idx = list(sel.retained)
    return CompressedLayerPair(
        layer=w[idx].copy(), next=nxt[:, idx].copy(), mode="pruned", mapping=sel
    )


def fold_merge_pair(w: np.ndarray, nxt: np.ndarray, a: ClusterAssignment) -> CompressedLayerPair:
    """Fuse identical folded outputs: layer rows become cluster means, the
    successor's columns are summed within clusters. Functionally exact."""
    w = check_weight_matrix(w)
    nxt = check_weight_matrix(nxt)
    check_chainable(w, nxt)
    if a.m != w.shape[0]:
        raise ShapeError(f"assignment covers {a.m} rows, matrix has {w.shape[0]}")
    merged_next = np.zeros((nxt.shape[0], a.k))
    np.add.at(merged_next.T, a.labels, nxt.T)
    return CompressedLayerPair(
        layer=cluster_means(a, w), next=merged_next, mode="folded", mapping=a
    )


def budget_for(m: int, ratio: float) -> int:
    """Retained size per layer: k = max(1, round(ratio * m))."""
    if not 0 < ratio <= 1:
        raise InvalidBudgetError(f"ratio must be in (0, 1], got {ratio}")
    return min(m, max(1, round(ratio * m)))


def _fold_budget(k: int, m: int, rank_mode: str) -> int:
    if rank_mode not in RANK_MODES:
        raise ValueError(f"rank_mode must be one of {RANK_MODES}, got {rank_mode!r}")
    if rank_mode == "theorem-slack":
        return min(m, k + 1)
    return k


def _compress_layer(w, k_f_or_kp, method, criterion, seed, exact, max_sweeps, restarts, rank_mode):
    """Select the mapping for one layer. Returns (mapping, error_sq, wcss)."""
    from .analysis import recon_error_sq  # local import to avoid a cycle

    m = w.shape[0]
    k = k_f_or_kp
    if method in ("mag1", "mag2"):
        crit = "l1" if method == "mag1" else "l2"
        sel = magnitude_select(w, k, crit)
        dropped = [i for i in range(m) if i not in set(sel.retained)]
        err = float(math.fsum((w[dropped] ** 2).ravel().tolist())) if dropped else 0.0
        return sel, err, None
    if method == "singleton-fold":
        sel = magnitude_select(w, k, criterion)
        if sel.rank == m:
            a = identity_assignment(m)
        else:
            a = singleton_fold(sel)
        from .projection import fold_rows

        err = recon_error_sq(w, fold_rows(a, w))
        return a, err, err
    if method == "fold":
        k_f = _fold_budget(k, m, rank_mode)
        if k_f == m:
            a = identity_assignment(m)  # canonical zero-error fold
        else:
            a = optimal_fold(
                w, k_f, seed=seed, exact=exact, max_sweeps=max_sweeps, restarts=restarts
            )
        from .projection import fold_rows

        err = recon_error_sq(w, fold_rows(a, w))
        return a, err, err
    raise ValueError(f"method must be one of {METHODS}, got {method!r}")


def compress_checkpoint(
    ckpt: Checkpoint,
    ratio: float,
    method: str,
    seed: int = 0,
    criterion: str = "l2",
    exact: bool = False,
    max_sweeps: int = 10,
    restarts: int = 1,
    rank_mode: str = "matched",
) -> tuple[Checkpoint, dict]:
    """Compress every layer that heads an adjacency pair; copy the rest.

    Each compressible layer gets budget k = max(1, round(ratio * m)).
    Returns the compressed checkpoint plus per-layer metadata.
    """
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}, got {method!r}")
    arrays = {name: ckpt.arrays[name].copy() for name in ckpt.names}
    per_layer = []
    for name, next_name in ckpt.adjacency:
        w = arrays[name]
        nxt = arrays[next_name]
        m = w.shape[0]
        k = budget_for(m, ratio)
        mapping, err, wcss = _compress_layer(
            w, k, method, criterion, seed, exact, max_sweeps, restarts, rank_mode
        )
        if isinstance(mapping, PruneSelection):
            pair = prune_drop_pair(w, nxt, mapping)
        else:
            pair = fold_merge_pair(w, nxt, mapping)
        arrays[name] = pair.layer
        arrays[next_name] = pair.next
        per_layer.append(
            {
                "name": name,
                "m": int(m),
                "k": int(pair.k_eff),
                "error_sq": err,
                "wcss": wcss,
            }
        )
    out = Checkpoint(
        names=list(ckpt.names),
        arrays=arrays,
        kinds=dict(ckpt.kinds),
        adjacency=list(ckpt.adjacency),
    )
    metadata = {
        "method": method,
        "ratio": ratio,
        "criterion": criterion,
        "seed": seed,
        "rank_mode": rank_mode,
        "per_layer": per_layer,
    }
    return out, metadata
