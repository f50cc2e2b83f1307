"""k-means on weight rows: Hartigan local search plus an exact oracle.

The Hartigan sweep moves one row at a time to the cluster that most
decreases the within-cluster sum of squares (WCSS), using the exact
size-corrected delta; one sweep costs O(pkm) and at most 10 sweeps run
by default. The exact oracle enumerates set partitions (restricted
growth strings) and is limited to m <= 12 rows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import InstanceTooLargeError, InvalidBudgetError
from .projection import ClusterAssignment
from .validation import check_weight_matrix

EXACT_MAX_ROWS = 12

# Moves must beat half the stability tolerance so that the returned
# assignment has slack against the 1e-12*max(1, wcss) stability contract
# even after rounding.
_ACCEPT_SCALE = 0.5e-12
STABILITY_SCALE = 1e-12


@dataclass(frozen=True)
class KMeansResult:
    """A clustering with its objective value and sweep trace."""

    assignment: ClusterAssignment
    wcss: float
    sweeps_used: int
    wcss_per_sweep: tuple[float, ...] = ()


def wcss_of(w: np.ndarray, a: ClusterAssignment) -> float:
    """Recompute the within-cluster sum of squares from scratch."""
    w = check_weight_matrix(w)
    sums = np.zeros((a.k, w.shape[1]))
    np.add.at(sums, a.labels, w)
    means = sums / a.cluster_sizes()[:, None]
    diffs = w - means[a.labels]
    return math.fsum((diffs * diffs).ravel().tolist())


def _check_k(m: int, k: int) -> None:
    if not 1 <= k <= m:
        raise InvalidBudgetError(f"k={k} out of [1, {m}]")


def init_assignment(w: np.ndarray, k: int, seed: int) -> ClusterAssignment:
    """k-means++-style seeding on rows, then nearest-center labels.

    The first center is drawn uniformly; subsequent centers are drawn
    proportionally to squared distance from the chosen set. Every cluster
    is guaranteed nonempty by pinning each seed row to its own cluster.
    """
    w = check_weight_matrix(w)
    m = w.shape[0]
    _check_k(m, k)
    rng = np.random.default_rng(seed)

    seeds = [int(rng.integers(m))]
    d2 = ((w - w[seeds[0]]) ** 2).sum(axis=1)
    d2[seeds[0]] = 0.0
    for _ in range(k - 1):
        total = d2.sum()
        if total > 0:
            idx = int(rng.choice(m, p=d2 / total))
        else:
            # duplicate rows: fall back to the lowest unused index
            used = set(seeds)
            idx = next(i for i in range(m) if i not in used)
        seeds.append(idx)
        d2 = np.minimum(d2, ((w - w[idx]) ** 2).sum(axis=1))
        d2[idx] = 0.0

    centers = w[seeds]
    dists = ((w[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    labels = dists.argmin(axis=1)
    for c, idx in enumerate(seeds):
        labels[idx] = c
    return ClusterAssignment(labels=labels, k=k)


@njit(cache=True)
def _hartigan_sweeps(x, labels, k, max_sweeps, accept_scale):  # pragma: no cover
    m, p = x.shape
    centers = np.zeros((k, p))
    sizes = np.zeros(k, dtype=np.int64)
    history = np.empty(max_sweeps + 1)
    sweeps = 0
    for s in range(max_sweeps):
        # recompute centers and wcss exactly at each sweep start to
        # bound incremental-update drift
        centers[:] = 0.0
        sizes[:] = 0
        for i in range(m):
            c = labels[i]
            sizes[c] += 1
            for j in range(p):
                centers[c, j] += x[i, j]
        for c in range(k):
            for j in range(p):
                centers[c, j] /= sizes[c]
        wcss = 0.0
        for i in range(m):
            c = labels[i]
            for j in range(p):
                d = x[i, j] - centers[c, j]
                wcss += d * d
        history[s] = wcss
        tol = accept_scale * max(1.0, wcss)
        moved = 0
        for i in range(m):
            a = labels[i]
            if sizes[a] <= 1:
                continue  # a move would empty cluster a
            da = 0.0
            for j in range(p):
                d = x[i, j] - centers[a, j]
                da += d * d
            removal_gain = sizes[a] / (sizes[a] - 1.0) * da
            best_b = -1
            best_delta = -tol
            for b in range(k):
                if b == a:
                    continue
                db = 0.0
                for j in range(p):
                    d = x[i, j] - centers[b, j]
                    db += d * d
                delta = sizes[b] / (sizes[b] + 1.0) * db - removal_gain
                if delta < best_delta:
                    best_delta = delta
                    best_b = b
            if best_b >= 0:
                na = sizes[a]
                nb = sizes[best_b]
                for j in range(p):
                    centers[a, j] = (centers[a, j] * na - x[i, j]) / (na - 1)
                    centers[best_b, j] = (centers[best_b, j] * nb + x[i, j]) / (nb + 1)
                sizes[a] -= 1
                sizes[best_b] += 1
                labels[i] = best_b
                moved += 1
        sweeps = s + 1
        if moved == 0:
            break
    # final objective for the returned labels
    centers[:] = 0.0
    sizes[:] = 0
    for i in range(m):
        c = labels[i]
        sizes[c] += 1
        for j in range(p):
            centers[c, j] += x[i, j]
    for c in range(k):
        for j in range(p):
            centers[c, j] /= sizes[c]
    wcss = 0.0
    for i in range(m):
        c = labels[i]
        for j in range(p):
            d = x[i, j] - centers[c, j]
            wcss += d * d
    history[sweeps] = wcss
    return sweeps, history[: sweeps + 1]


def kmeans_hartigan(
    w: np.ndarray,
    k: int,
    seed: int = 0,
    max_sweeps: int = 10,
    init: ClusterAssignment | None = None,
) -> KMeansResult:
    """Hartigan local search for a k-clustering of the rows of ``w``.

    Deterministic for fixed (w, k, seed). Rows are scanned in ascending
    index order; ties between target clusters go to the lowest cluster
    id; moves that would empty a cluster are forbidden. ``init`` warm
    starts the search from a given assignment (WCSS never increases, so
    the result is no worse than the start).
    """
    w = check_weight_matrix(w)
    m = w.shape[0]
    _check_k(m, k)
    if max_sweeps < 1:
        raise InvalidBudgetError(f"max_sweeps must be >= 1, got {max_sweeps}")
    if init is None:
        init = init_assignment(w, k, seed)
    elif init.m != m or init.k != k:
        raise InvalidBudgetError("init assignment does not match (m, k)")

    labels = np.array(init.labels, dtype=np.int64)
    sweeps, history = _hartigan_sweeps(w, labels, k, max_sweeps, _ACCEPT_SCALE)
    assignment = ClusterAssignment(labels=labels, k=k)
    return KMeansResult(
        assignment=assignment,
        wcss=float(history[-1]),
        sweeps_used=int(sweeps),
        wcss_per_sweep=tuple(float(v) for v in history),
    )


def _extend_rgs(prefixes: np.ndarray, maxlab: np.ndarray, kmax: int):
    """One step of restricted-growth-string generation, lexicographic order."""
    counts = np.minimum(maxlab + 2, kmax).astype(np.int64)
    total = int(counts.sum())
    parent = np.repeat(np.arange(prefixes.shape[0]), counts)
    offsets = np.repeat(np.cumsum(counts) - counts, counts)
    new_label = (np.arange(total) - offsets).astype(np.int8)
    out = np.empty((total, prefixes.shape[1] + 1), dtype=np.int8)
    out[:, :-1] = prefixes[parent]
    out[:, -1] = new_label
    return out, np.maximum(maxlab[parent], new_label)


def enumerate_partitions(m: int, kmax: int) -> tuple[np.ndarray, np.ndarray]:
    """All canonical label vectors of length m with at most kmax blocks.

    Returns (labels, n_blocks); rows are in lexicographic order.
    """
    labels = np.zeros((1, 1), dtype=np.int8)
    maxlab = np.zeros(1, dtype=np.int8)
    for _ in range(m - 1):
        labels, maxlab = _extend_rgs(labels, maxlab, kmax)
    return labels, maxlab.astype(np.int64) + 1


def _batched_wcss(w: np.ndarray, labels: np.ndarray, kmax: int) -> np.ndarray:
    """WCSS of each labeling in a batch, via the factorization identity
    wcss = sum ||x_i||^2 - sum_j ||s_j||^2 / n_j."""
    total_sq = float((w * w).sum())
    out = np.empty(labels.shape[0])
    chunk = max(1, 8_000_000 // (w.shape[0] * kmax + 1))
    eye = np.eye(kmax)
    for lo in range(0, labels.shape[0], chunk):
        batch = labels[lo : lo + chunk]
        onehot = eye[batch]  # (B, m, kmax)
        counts = onehot.sum(axis=1)  # (B, kmax)
        sums = np.einsum("bmk,mp->bkp", onehot, w)
        sq = (sums * sums).sum(axis=2)
        np.divide(sq, counts, out=sq, where=counts > 0)
        out[lo : lo + chunk] = total_sq - sq.sum(axis=1)
    return out


def kmeans_exact(w: np.ndarray, k: int) -> KMeansResult:
    """Globally optimal k-clustering by set-partition enumeration (m <= 12).

    Ties are broken by the lexicographically smallest canonical label
    vector.
    """
    w = check_weight_matrix(w)
    m = w.shape[0]
    _check_k(m, k)
    if m > EXACT_MAX_ROWS:
        raise InstanceTooLargeError(f"exact oracle limited to m <= {EXACT_MAX_ROWS}, got m={m}")

    labels, n_blocks = enumerate_partitions(m, k)
    mask = n_blocks == k
    labels = labels[mask]
    costs = _batched_wcss(w, labels, k)
    best = int(costs.argmin())  # argmin keeps the first (lex smallest) on ties
    assignment = ClusterAssignment(labels=labels[best].astype(np.int64), k=k)
    return KMeansResult(assignment=assignment, wcss=wcss_of(w, assignment), sweeps_used=0)


def exact_fold_wcss_all_k(w: np.ndarray) -> dict[int, float]:
    """Minimal WCSS for every cluster count 1..m in one enumeration pass."""
    w = check_weight_matrix(w)
    m = w.shape[0]
    if m > EXACT_MAX_ROWS:
        raise InstanceTooLargeError(f"exact oracle limited to m <= {EXACT_MAX_ROWS}, got m={m}")
    labels, n_blocks = enumerate_partitions(m, m)
    costs = _batched_wcss(w, labels, m)
    best: dict[int, float] = {}
    for k in range(1, m + 1):
        mask = n_blocks == k
        best[k] = float(costs[mask].min())
    return best
