"""Orthogonal projections for structured pruning and model folding.

Both compression styles are projections C = U (U^T U)^-1 U^T onto a
k-dimensional subspace: pruning onto coordinate axes of the retained
rows, folding onto the indicator subspace of a row clustering. For both
bases U^T U is diagonal (identity for pruning, cluster sizes for
folding), so C is formed in closed form without a general inverse.
Materialized projection matrices exist for verification and small m;
production paths use fold_rows / index selection instead.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ShapeError
from .validation import check_weight_matrix


@dataclass(frozen=True)
class PruneSelection:
    """Retained row indices of an m-row matrix (coordinate-aligned basis)."""

    retained: tuple[int, ...]
    m: int

    def __post_init__(self):
        if self.m < 1:
            raise ValueError(f"m must be >= 1, got {self.m}")
        retained = tuple(int(i) for i in self.retained)
        object.__setattr__(self, "retained", retained)
        if any(i < 0 or i >= self.m for i in retained):
            raise ValueError(f"retained index out of [0, {self.m})")
        if any(b <= a for a, b in zip(retained, retained[1:])):
            raise ValueError("retained indices must be strictly increasing")

    @property
    def rank(self) -> int:
        return len(self.retained)

    @property
    def pruned(self) -> tuple[int, ...]:
        kept = set(self.retained)
        return tuple(i for i in range(self.m) if i not in kept)


@dataclass(frozen=True)
class ClusterAssignment:
    """Length-m cluster label vector with k nonempty clusters."""

    labels: np.ndarray = field(repr=False)
    k: int

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int64).copy()
        labels.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        if labels.ndim != 1 or labels.size < 1:
            raise ValueError("labels must be a nonempty 1-D vector")
        if not 1 <= self.k <= labels.size:
            raise ValueError(f"k={self.k} out of [1, {labels.size}]")
        counts = np.bincount(labels, minlength=self.k)
        if labels.min() < 0 or labels.max() >= self.k:
            raise ValueError(f"label out of [0, {self.k})")
        if (counts[: self.k] == 0).any():
            raise ValueError("every cluster must be nonempty")

    @property
    def m(self) -> int:
        return self.labels.size

    def cluster_sizes(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.k)


def identity_assignment(m: int) -> ClusterAssignment:
    """Each row its own cluster; the induced fold is the identity."""
    return ClusterAssignment(labels=np.arange(m), k=m)


def prune_projection(sel: PruneSelection) -> np.ndarray:
    """Diagonal projection with 1 at retained rows, 0 at pruned rows."""
    diag = np.zeros(sel.m)
    if sel.retained:
        diag[list(sel.retained)] = 1.0
    return np.diag(diag)


def fold_projection(a: ClusterAssignment) -> np.ndarray:
    """Projection averaging within clusters: C[i, j] = 1/|S| iff i, j share cluster S."""
    labels = a.labels
    sizes = a.cluster_sizes().astype(np.float64)
    same = labels[:, None] == labels[None, :]
    return same / sizes[labels][:, None]


def apply_projection(c: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Return C @ W for an m-by-m projection and m-by-p weight matrix."""
    w = check_weight_matrix(w)
    if c.ndim != 2 or c.shape[0] != c.shape[1]:
        raise ShapeError(f"projection must be square, got {c.shape}")
    if c.shape[0] != w.shape[0]:
        raise ShapeError(f"projection is {c.shape[0]}x{c.shape[0]} but matrix has {w.shape[0]} rows")
    return c @ w


def fold_rows(a: ClusterAssignment, w: np.ndarray) -> np.ndarray:
    """Replace each row by its cluster mean in O(mp), without materializing C."""
    w = check_weight_matrix(w)
    if a.m != w.shape[0]:
        raise ShapeError(f"assignment has {a.m} rows but matrix has {w.shape[0]}")
    means = cluster_means(a, w)
    return means[a.labels]


def cluster_means(a: ClusterAssignment, w: np.ndarray) -> np.ndarray:
    """Per-cluster mean rows, shape (k, p)."""
    if a.m != w.shape[0]:
        raise ShapeError(f"assignment has {a.m} rows but matrix has {w.shape[0]}")
    sums = np.zeros((a.k, w.shape[1]))
    np.add.at(sums, a.labels, w)
    return sums / a.cluster_sizes()[:, None]
