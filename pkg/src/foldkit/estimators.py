"""scikit-learn style wrappers over the functional core.

These let the clustering and compression operators participate in
sklearn pipelines and grid searches: HartiganKMeans behaves like a
clusterer (fit / labels_ / inertia_), MagnitudePruner and WeightFolder
are transformers over weight matrices (rows in, fewer rows out).
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin, TransformerMixin
from sklearn.exceptions import NotFittedError

from .clustering import kmeans_exact, kmeans_hartigan
from .compress import magnitude_select
from .projection import cluster_means, fold_rows
from .validation import check_weight_matrix


class HartiganKMeans(ClusterMixin, BaseEstimator):
    """k-means on matrix rows via Hartigan local search.

    Parameters
    ----------
    n_clusters : number of clusters, 1 <= n_clusters <= n_rows.
    seed : RNG seed for the k-means++-style initialization.
    max_sweeps : Hartigan sweep budget.
    exact : use exhaustive set-partition enumeration (n_rows <= 12).
    """

    def __init__(self, n_clusters: int = 2, seed: int = 0, max_sweeps: int = 10, exact: bool = False):
        self.n_clusters = n_clusters
        self.seed = seed
        self.max_sweeps = max_sweeps
        self.exact = exact

    def fit(self, X, y=None):
        X = check_weight_matrix(np.asarray(X, dtype=np.float64))
        if self.exact:
            res = kmeans_exact(X, self.n_clusters)
        else:
            res = kmeans_hartigan(X, self.n_clusters, seed=self.seed, max_sweeps=self.max_sweeps)
        self.assignment_ = res.assignment
        self.labels_ = np.asarray(res.assignment.labels)
        self.inertia_ = res.wcss
        self.n_sweeps_ = res.sweeps_used
        self.cluster_centers_ = cluster_means(res.assignment, X)
        return self

    def predict(self, X):
        """Nearest fitted center; ties go to the lowest cluster id."""
        if not hasattr(self, "cluster_centers_"):
            raise NotFittedError("call fit first")
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        d2 = ((X[:, None, :] - self.cluster_centers_[None, :, :]) ** 2).sum(axis=2)
        return d2.argmin(axis=1)


class MagnitudePruner(TransformerMixin, BaseEstimator):
    """Keep the n_retained largest-magnitude rows (L1 or L2 criterion)."""

    def __init__(self, n_retained: int = 1, criterion: str = "l2"):
        self.n_retained = n_retained
        self.criterion = criterion

    def fit(self, X, y=None):
        X = check_weight_matrix(np.asarray(X, dtype=np.float64))
        self.selection_ = magnitude_select(X, self.n_retained, self.criterion)
        return self

    def transform(self, X):
        if not hasattr(self, "selection_"):
            raise NotFittedError("call fit first")
        X = check_weight_matrix(np.asarray(X, dtype=np.float64))
        return X[list(self.selection_.retained)].copy()


class WeightFolder(TransformerMixin, BaseEstimator):
    """Cluster rows and replace each cluster by its mean (k rows out)."""

    def __init__(self, n_clusters: int = 2, seed: int = 0, max_sweeps: int = 10, exact: bool = False):
        self.n_clusters = n_clusters
        self.seed = seed
        self.max_sweeps = max_sweeps
        self.exact = exact

    def fit(self, X, y=None):
        X = np.asarray(X, dtype=np.float64)
        inner = HartiganKMeans(
            n_clusters=self.n_clusters, seed=self.seed, max_sweeps=self.max_sweeps, exact=self.exact
        ).fit(X)
        self.assignment_ = inner.assignment_
        self.inertia_ = inner.inertia_
        return self

    def transform(self, X):
        """Return the k cluster-mean rows of the fitted assignment."""
        if not hasattr(self, "assignment_"):
            raise NotFittedError("call fit first")
        X = check_weight_matrix(np.asarray(X, dtype=np.float64))
        return cluster_means(self.assignment_, X)

    def project(self, X):
        """Full-size folded matrix (each row replaced by its cluster mean)."""
        if not hasattr(self, "assignment_"):
            raise NotFittedError("call fit first")
        X = check_weight_matrix(np.asarray(X, dtype=np.float64))
        return fold_rows(self.assignment_, X)
