"""Hartigan local search and the exact enumeration oracle."""

import numpy as np
import pytest

from foldkit.clustering import (
    EXACT_MAX_ROWS,
    STABILITY_SCALE,
    enumerate_partitions,
    exact_fold_wcss_all_k,
    init_assignment,
    kmeans_exact,
    kmeans_hartigan,
    wcss_of,
)
from foldkit.errors import InstanceTooLargeError, InvalidBudgetError
from foldkit.projection import ClusterAssignment, cluster_means


def brute_best_move_delta(w, assignment):
    """Exact best single-point move improvement, scanned over all m*(k-1) moves."""
    labels = np.array(assignment.labels)
    k = assignment.k
    best = 0.0
    for i in range(len(labels)):
        a = labels[i]
        size_a = (labels == a).sum()
        if size_a == 1:
            continue
        mu_a = w[labels == a].mean(axis=0)
        da = ((w[i] - mu_a) ** 2).sum()
        for b in range(k):
            if b == a:
                continue
            size_b = (labels == b).sum()
            mu_b = w[labels == b].mean(axis=0)
            db = ((w[i] - mu_b) ** 2).sum()
            delta = size_b / (size_b + 1) * db - size_a / (size_a - 1) * da
            best = min(best, delta)
    return best


# --- worked examples --------------------------------------------------------


def test_hartigan_three_points():
    w = np.array([[0.0], [0.1], [10.0]])
    res = kmeans_hartigan(w, 2, seed=0)
    labels = np.array(res.assignment.labels)
    assert labels[0] == labels[1] != labels[2]
    assert res.wcss == pytest.approx(0.005, rel=1e-12)


def test_hartigan_k_equals_m():
    w = np.random.default_rng(1).standard_normal((5, 3))
    res = kmeans_hartigan(w, 5, seed=0)
    assert len(set(res.assignment.labels.tolist())) == 5
    assert res.wcss == pytest.approx(0.0, abs=1e-12)


def test_hartigan_k_one():
    rng = np.random.default_rng(2)
    w = rng.standard_normal((6, 2))
    res = kmeans_hartigan(w, 1, seed=0)
    mean = w.mean(axis=0)
    expected = ((w - mean) ** 2).sum()
    assert res.wcss == pytest.approx(expected, rel=1e-12)


def test_exact_three_points():
    w = np.array([[0.0], [0.1], [10.0]])
    res = kmeans_exact(w, 2)
    assert res.assignment.labels.tolist() == [0, 0, 1]
    assert res.wcss == pytest.approx(0.005, rel=1e-12)


def test_exact_duplicates_collapse():
    w = np.array([[1.0, 1.0], [1.0, 1.0], [9.0, 9.0]])
    res = kmeans_exact(w, 2)
    assert res.assignment.labels.tolist() == [0, 0, 1]
    assert res.wcss == pytest.approx(0.0, abs=1e-15)


def test_exact_k_equals_m():
    w = np.random.default_rng(3).standard_normal((4, 2))
    assert kmeans_exact(w, 4).wcss == pytest.approx(0.0, abs=1e-15)


def test_exact_instance_too_large():
    w = np.zeros((EXACT_MAX_ROWS + 1, 2))
    with pytest.raises(InstanceTooLargeError):
        kmeans_exact(w, 2)


def test_invalid_k():
    w = np.zeros((3, 2))
    with pytest.raises(InvalidBudgetError):
        kmeans_hartigan(w, 4)
    with pytest.raises(InvalidBudgetError):
        kmeans_hartigan(w, 0)
    with pytest.raises(InvalidBudgetError):
        kmeans_exact(w, 0)


# --- init -----------------------------------------------------------------


def test_init_k_equals_m_singletons():
    w = np.random.default_rng(4).standard_normal((6, 2))
    a = init_assignment(w, 6, seed=0)
    assert len(set(a.labels.tolist())) == 6


def test_init_k_one_all_zero():
    w = np.random.default_rng(5).standard_normal((4, 2))
    a = init_assignment(w, 1, seed=0)
    assert a.labels.tolist() == [0, 0, 0, 0]


def test_init_deterministic():
    w = np.random.default_rng(6).standard_normal((10, 3))
    a = init_assignment(w, 3, seed=11)
    b = init_assignment(w, 3, seed=11)
    assert a.labels.tolist() == b.labels.tolist()


def test_init_duplicate_rows_still_nonempty():
    w = np.ones((5, 2))
    a = init_assignment(w, 3, seed=0)
    assert np.bincount(a.labels, minlength=3).min() >= 1


# --- contracts ------------------------------------------------------------


def test_hartigan_deterministic():
    w = np.random.default_rng(7).standard_normal((20, 4))
    r1 = kmeans_hartigan(w, 4, seed=9)
    r2 = kmeans_hartigan(w, 4, seed=9)
    assert r1.assignment.labels.tolist() == r2.assignment.labels.tolist()
    assert r1.wcss == r2.wcss


def test_hartigan_wcss_matches_recompute():
    rng = np.random.default_rng(8)
    for _ in range(20):
        m = int(rng.integers(2, 30))
        p = int(rng.integers(1, 8))
        k = int(rng.integers(1, m + 1))
        w = rng.standard_normal((m, p))
        res = kmeans_hartigan(w, k, seed=int(rng.integers(100)))
        assert res.wcss == pytest.approx(wcss_of(w, res.assignment), rel=1e-9, abs=1e-12)
        assert res.sweeps_used <= 10


def test_hartigan_monotone_per_sweep():
    rng = np.random.default_rng(9)
    for _ in range(30):
        m = int(rng.integers(4, 40))
        k = int(rng.integers(2, min(m, 8) + 1))
        w = rng.standard_normal((m, int(rng.integers(1, 6))))
        res = kmeans_hartigan(w, k, seed=int(rng.integers(100)))
        hist = res.wcss_per_sweep
        for a, b in zip(hist, hist[1:]):
            assert b <= a + 1e-12 * max(1.0, a)


def test_hartigan_stability_brute_scan():
    rng = np.random.default_rng(10)
    for _ in range(20):
        m = int(rng.integers(4, 16))
        k = int(rng.integers(2, min(m, 5) + 1))
        w = rng.standard_normal((m, int(rng.integers(1, 5))))
        res = kmeans_hartigan(w, k, seed=int(rng.integers(100)))
        if res.sweeps_used < 10:  # converged: stability contract applies
            best = brute_best_move_delta(w, res.assignment)
            assert best >= -STABILITY_SCALE * max(1.0, res.wcss)


def test_exact_dominates_hartigan():
    rng = np.random.default_rng(11)
    for _ in range(40):
        m = int(rng.integers(2, 11))
        k = int(rng.integers(1, min(m, 4) + 1))
        w = rng.standard_normal((m, int(rng.integers(1, 6))))
        exact = kmeans_exact(w, k)
        hart = kmeans_hartigan(w, k, seed=int(rng.integers(100)))
        assert exact.wcss <= hart.wcss + 1e-9


def test_warm_start_never_worse_than_init():
    rng = np.random.default_rng(12)
    for _ in range(20):
        m = int(rng.integers(3, 20))
        k = int(rng.integers(2, min(m, 6) + 1))
        w = rng.standard_normal((m, 3))
        init = init_assignment(w, k, seed=1)
        res = kmeans_hartigan(w, k, init=init)
        assert res.wcss <= wcss_of(w, init) + 1e-9


def test_exact_wcss_permutation_invariant():
    rng = np.random.default_rng(13)
    for _ in range(10):
        m = int(rng.integers(3, 8))
        w = rng.standard_normal((m, 2))
        k = int(rng.integers(1, m + 1))
        perm = rng.permutation(m)
        base = kmeans_exact(w, k)
        shuffled = kmeans_exact(w[perm], k)
        assert shuffled.wcss == pytest.approx(base.wcss, rel=1e-9, abs=1e-12)
        # labels permute consistently up to renaming
        inv = {}
        for i, row in enumerate(perm):
            inv[int(base.assignment.labels[row])] = int(shuffled.assignment.labels[i])
        relabeled = [inv[int(base.assignment.labels[row])] for row in perm]
        assert relabeled == shuffled.assignment.labels.tolist()


def test_hartigan_wcss_permutation_invariant_separated():
    # well-separated blobs: local search reaches the global optimum from
    # any row order, so wcss must match under permutation
    rng = np.random.default_rng(14)
    centers = np.array([[0.0, 0.0], [100.0, 0.0], [0.0, 100.0]])
    w = np.vstack([c + 0.01 * rng.standard_normal((8, 2)) for c in centers])
    perm = rng.permutation(w.shape[0])
    a = kmeans_hartigan(w, 3, seed=0)
    b = kmeans_hartigan(w[perm], 3, seed=0)
    assert b.wcss == pytest.approx(a.wcss, rel=1e-9)


# --- enumeration ----------------------------------------------------------


def test_partition_counts_are_bell_and_stirling():
    labels, blocks = enumerate_partitions(5, 5)
    assert labels.shape[0] == 52  # Bell(5)
    counts = np.bincount(blocks, minlength=6)
    assert counts[1:6].tolist() == [1, 15, 25, 10, 1]  # Stirling S(5, k)


def test_exact_all_k_matches_per_k_oracle():
    rng = np.random.default_rng(15)
    w = rng.standard_normal((6, 3))
    table = exact_fold_wcss_all_k(w)
    for k in range(1, 7):
        assert table[k] == pytest.approx(kmeans_exact(w, k).wcss, rel=1e-9, abs=1e-12)
