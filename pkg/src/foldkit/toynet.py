"""Minimal dense/ReLU inference engine for functional equivalence checks.

Exists to verify the compression algebra end to end: a merged folded
network must compute exactly the same function as the full-size network
with the folded (projected) layer, and a physically pruned pair must
match the zero-masked full-size network. No biases, no training.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .compress import fold_merge_pair, magnitude_select, optimal_fold, prune_drop_pair, singleton_fold
from .errors import ShapeError
from .projection import ClusterAssignment, PruneSelection, fold_rows, identity_assignment
from .analysis import recon_error_sq
from .validation import check_weight_matrix


@dataclass(frozen=True)
class ToyMLP:
    """Dense layers with ReLU between them and identity on the last."""

    layers: tuple[np.ndarray, ...]

    def __post_init__(self):
        layers = tuple(check_weight_matrix(w, allow_empty=True) for w in self.layers)
        object.__setattr__(self, "layers", layers)
        for a, b in zip(layers, layers[1:]):
            if b.shape[1] != a.shape[0]:
                raise ShapeError(
                    f"layer chain broken: {a.shape} feeds {b.shape}"
                )

    @property
    def in_dim(self) -> int:
        return self.layers[0].shape[1]

    @property
    def out_dim(self) -> int:
        return self.layers[-1].shape[0]


@dataclass(frozen=True)
class EvalBatch:
    inputs: np.ndarray  # (n, d)
    targets: np.ndarray  # (n, c)

    def __post_init__(self):
        object.__setattr__(self, "inputs", np.atleast_2d(np.asarray(self.inputs, dtype=np.float64)))
        object.__setattr__(self, "targets", np.atleast_2d(np.asarray(self.targets, dtype=np.float64)))
        if self.inputs.shape[0] != self.targets.shape[0]:
            raise ShapeError("inputs and targets disagree on batch size")


def random_mlp(dims: list[int], seed: int = 0) -> ToyMLP:
    """Seeded net with i.i.d. uniform[-1, 1] weights; dims = [d, h1, ..., c]."""
    if len(dims) < 2:
        raise ValueError("need at least an input and an output dimension")
    rng = np.random.default_rng(seed)
    layers = tuple(rng.uniform(-1.0, 1.0, size=(o, i)) for i, o in zip(dims, dims[1:]))
    return ToyMLP(layers=layers)


def forward(net: ToyMLP, x: np.ndarray) -> np.ndarray:
    """Batched forward pass: alternating matmul and ReLU, identity at the end."""
    h = np.atleast_2d(np.asarray(x, dtype=np.float64))
    if h.shape[1] != net.in_dim:
        raise ShapeError(f"input has {h.shape[1]} features, net expects {net.in_dim}")
    last = len(net.layers) - 1
    for i, w in enumerate(net.layers):
        h = h @ w.T
        if i != last:
            np.maximum(h, 0.0, out=h)
    return h


def mse_loss(net: ToyMLP, batch: EvalBatch) -> float:
    """Mean squared error over all batch entries and output units."""
    out = forward(net, batch.inputs)
    if out.shape != batch.targets.shape:
        raise ShapeError(f"outputs {out.shape} vs targets {batch.targets.shape}")
    diff = out - batch.targets
    return float((diff * diff).mean())


def _replace_layer(net: ToyMLP, idx: int, w: np.ndarray) -> ToyMLP:
    layers = list(net.layers)
    layers[idx] = w
    return ToyMLP(layers=tuple(layers))


def _replace_pair(net: ToyMLP, idx: int, layer: np.ndarray, nxt: np.ndarray) -> ToyMLP:
    layers = list(net.layers)
    layers[idx] = layer
    layers[idx + 1] = nxt
    return ToyMLP(layers=tuple(layers))


def fold_equivalence_check(
    net: ToyMLP, layer_idx: int, a: ClusterAssignment, batch: EvalBatch
) -> float:
    """Max absolute output deviation between (i) the full-size net with the
    layer replaced by its fold and (ii) the merged smaller net. Exact
    algebra; the return value only measures rounding."""
    if layer_idx >= len(net.layers) - 1:
        raise ShapeError("folded layer needs a successor layer")
    w = net.layers[layer_idx]
    nxt = net.layers[layer_idx + 1]
    full = _replace_layer(net, layer_idx, fold_rows(a, w))
    pair = fold_merge_pair(w, nxt, a)
    merged = _replace_pair(net, layer_idx, pair.layer, pair.next)
    dev = np.abs(forward(full, batch.inputs) - forward(merged, batch.inputs))
    return float(dev.max())


def prune_equivalence_check(
    net: ToyMLP, layer_idx: int, sel: PruneSelection, batch: EvalBatch
) -> float:
    """Max absolute deviation between the zero-masked full-size net and the
    physically pruned pair; zero up to dropped-column algebra."""
    if layer_idx >= len(net.layers) - 1:
        raise ShapeError("pruned layer needs a successor layer")
    w = net.layers[layer_idx]
    nxt = net.layers[layer_idx + 1]
    masked = w.copy()
    dropped = [i for i in range(sel.m) if i not in set(sel.retained)]
    masked[dropped] = 0.0
    full = _replace_layer(net, layer_idx, masked)
    pair = prune_drop_pair(w, nxt, sel)
    pruned = _replace_pair(net, layer_idx, pair.layer, pair.next)
    dev = np.abs(forward(full, batch.inputs) - forward(pruned, batch.inputs))
    return float(dev.max())


def loss_perturbation(
    net: ToyMLP,
    layer_idx: int,
    method: str,
    k: int,
    batch: EvalBatch,
    criterion: str = "l2",
    seed: int = 0,
    exact: bool = False,
) -> dict:
    """Parameter distance and loss change for compressing one layer.

    Both quantities are reported; no sign claim is made about which
    method wins on loss.
    """
    w = net.layers[layer_idx]
    m = w.shape[0]
    if method in ("mag1", "mag2"):
        crit = "l1" if method == "mag1" else "l2"
        sel = magnitude_select(w, k, crit)
        masked = w.copy()
        dropped = [i for i in range(m) if i not in set(sel.retained)]
        masked[dropped] = 0.0
        w_c = masked
    elif method == "singleton-fold":
        sel = magnitude_select(w, k, criterion)
        a = identity_assignment(m) if sel.rank == m else singleton_fold(sel)
        w_c = fold_rows(a, w)
    elif method == "fold":
        a = identity_assignment(m) if k == m else optimal_fold(w, k, seed=seed, exact=exact)
        w_c = fold_rows(a, w)
    else:
        raise ValueError(f"unknown method {method!r}")
    compressed = _replace_layer(net, layer_idx, w_c)
    return {
        "param_dist": float(np.sqrt(recon_error_sq(w, w_c))),
        "loss_delta": abs(mse_loss(net, batch) - mse_loss(compressed, batch)),
    }
