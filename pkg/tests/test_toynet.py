"""Forward pass, merge equivalence, and loss perturbation on toy nets."""

import numpy as np
import pytest

from foldkit.compress import magnitude_select
from foldkit.errors import ShapeError
from foldkit.projection import ClusterAssignment, PruneSelection
from foldkit.toynet import (
    EvalBatch,
    ToyMLP,
    fold_equivalence_check,
    forward,
    loss_perturbation,
    mse_loss,
    prune_equivalence_check,
    random_mlp,
)


def random_assignment(rng, m, k):
    labels = rng.integers(k, size=m)
    labels[rng.permutation(m)[:k]] = np.arange(k)
    return ClusterAssignment(labels=labels, k=k)


# --- forward ----------------------------------------------------------------


def test_forward_identity_layer():
    net = ToyMLP(layers=(np.eye(3),))
    x = np.array([[1.0, -2.0, 3.0]])
    assert np.array_equal(forward(net, x), x)


def test_forward_relu_clamps():
    # hidden ReLU layer [[1],[-1]] into identity readout exposes the clamp
    net = ToyMLP(layers=(np.array([[1.0], [-1.0]]), np.eye(2)))
    out = forward(net, np.array([[2.0]]))
    assert out.tolist() == [[2.0, 0.0]]


def test_forward_two_layer_hand_computed():
    w1 = np.array([[1.0, 2.0], [-1.0, 1.0]])
    w2 = np.array([[1.0, 1.0], [2.0, 0.0]])
    net = ToyMLP(layers=(w1, w2))
    x = np.array([[1.0, 1.0]])
    # h = relu([3, 0]) = [3, 0]; out = [3, 6]
    assert forward(net, x).tolist() == [[3.0, 6.0]]


def test_forward_shape_error():
    net = ToyMLP(layers=(np.eye(3),))
    with pytest.raises(ShapeError):
        forward(net, np.ones((1, 2)))


def test_chain_validation():
    with pytest.raises(ShapeError):
        ToyMLP(layers=(np.ones((3, 2)), np.ones((2, 4))))


# --- loss ---------------------------------------------------------------------


def test_mse_zero_on_match():
    net = ToyMLP(layers=(np.eye(2),))
    batch = EvalBatch(inputs=np.ones((3, 2)), targets=np.ones((3, 2)))
    assert mse_loss(net, batch) == 0.0


def test_mse_scalar_case():
    net = ToyMLP(layers=(np.array([[1.0]]),))
    batch = EvalBatch(inputs=np.array([[1.0]]), targets=np.array([[0.0]]))
    assert mse_loss(net, batch) == 1.0


def test_mse_quadratic_scaling():
    net = ToyMLP(layers=(np.array([[1.0]]),))
    b1 = EvalBatch(inputs=np.array([[1.0]]), targets=np.array([[0.0]]))
    b2 = EvalBatch(inputs=np.array([[2.0]]), targets=np.array([[0.0]]))
    assert mse_loss(net, b2) == 4.0 * mse_loss(net, b1)


# --- fold equivalence -----------------------------------------------------------


def test_fold_equivalence_singletons_zero():
    net = random_mlp([3, 5, 2], seed=0)
    batch = EvalBatch(inputs=np.random.default_rng(1).uniform(-1, 1, (4, 3)), targets=np.zeros((4, 2)))
    a = ClusterAssignment(labels=np.arange(5), k=5)
    assert fold_equivalence_check(net, 0, a, batch) == 0.0


def test_fold_equivalence_two_unit_merge():
    rng = np.random.default_rng(2)
    net = ToyMLP(layers=(rng.uniform(-1, 1, (2, 3)), rng.uniform(-1, 1, (2, 2))))
    batch = EvalBatch(inputs=rng.uniform(-1, 1, (8, 3)), targets=np.zeros((8, 2)))
    a = ClusterAssignment(labels=np.array([0, 0]), k=1)
    assert fold_equivalence_check(net, 0, a, batch) <= 1e-12


def test_fold_equivalence_random_property():
    rng = np.random.default_rng(3)
    net = random_mlp([6, 16, 4], seed=7)
    batch = EvalBatch(inputs=rng.uniform(-1, 1, (100, 6)), targets=np.zeros((100, 4)))
    a = random_assignment(rng, 16, 4)
    assert fold_equivalence_check(net, 0, a, batch) <= 1e-9


def test_fold_equivalence_needs_successor():
    net = random_mlp([3, 4], seed=0)
    batch = EvalBatch(inputs=np.ones((1, 3)), targets=np.ones((1, 4)))
    with pytest.raises(ShapeError):
        fold_equivalence_check(net, 0, ClusterAssignment(labels=np.arange(4), k=4), batch)


def test_prune_equivalence_exact():
    rng = np.random.default_rng(4)
    net = random_mlp([5, 12, 3], seed=9)
    batch = EvalBatch(inputs=rng.uniform(-1, 1, (50, 5)), targets=np.zeros((50, 3)))
    for k in (0, 4, 12):
        sel = magnitude_select(net.layers[0], k)
        assert prune_equivalence_check(net, 0, sel, batch) <= 1e-12


# --- loss perturbation ------------------------------------------------------------


def _batch_for(net, n, seed):
    rng = np.random.default_rng(seed)
    return EvalBatch(
        inputs=rng.uniform(-1, 1, (n, net.in_dim)),
        targets=rng.uniform(-1, 1, (n, net.out_dim)),
    )


def test_loss_perturbation_identity_fold():
    net = random_mlp([4, 6, 2], seed=1)
    batch = _batch_for(net, 16, 2)
    rep = loss_perturbation(net, 0, "fold", 6, batch)
    assert rep["param_dist"] == pytest.approx(0.0, abs=1e-12)
    assert rep["loss_delta"] == pytest.approx(0.0, abs=1e-12)


def test_loss_perturbation_fold_distance_dominates_prune():
    # prune-all vs singleton-fold-all: the fold is provably closer in parameter space
    net = random_mlp([4, 6, 2], seed=3)
    batch = _batch_for(net, 16, 4)
    prune = loss_perturbation(net, 0, "mag2", 0, batch)
    fold = loss_perturbation(net, 0, "singleton-fold", 0, batch)
    assert fold["param_dist"] <= prune["param_dist"] + 1e-12
    assert prune["loss_delta"] >= 0.0 and fold["loss_delta"] >= 0.0


def test_loss_perturbation_zero_batch():
    net = random_mlp([4, 6, 2], seed=5)
    batch = EvalBatch(inputs=np.zeros((3, 4)), targets=np.zeros((3, 2)))
    for method, k in (("mag2", 2), ("fold", 3), ("singleton-fold", 2)):
        rep = loss_perturbation(net, 0, method, k, batch)
        assert rep["loss_delta"] == pytest.approx(0.0, abs=1e-15)


def test_lipschitz_consistency_reported():
    # measured local ratio bounds the compression loss delta at matching radius;
    # reported sanity check, not a global constant
    net = random_mlp([4, 8, 2], seed=6)
    batch = _batch_for(net, 32, 7)
    rep = loss_perturbation(net, 0, "fold", 3, batch, seed=0)
    if rep["param_dist"] == 0.0:
        pytest.skip("degenerate zero-distance compression")
    rng = np.random.default_rng(8)
    w = net.layers[0]
    base = mse_loss(net, batch)
    kappa_hat = 0.0
    for _ in range(10_000 // 50):  # 200 perturbations suffice for a sane estimate
        d = rng.standard_normal(w.shape)
        d *= rep["param_dist"] / np.linalg.norm(d)
        layers = list(net.layers)
        layers[0] = w + d
        loss = mse_loss(ToyMLP(layers=tuple(layers)), batch)
        kappa_hat = max(kappa_hat, abs(loss - base) / rep["param_dist"])
    assert np.isfinite(kappa_hat) and kappa_hat >= 0.0
    # local constant, reported rather than asserted
    print(
        f"lipschitz check: loss_delta={rep['loss_delta']:.3e} "
        f"kappa_hat*dist={kappa_hat * rep['param_dist']:.3e}"
    )
