"""Input validation helpers shared across modules."""

from __future__ import annotations

import numpy as np

from .errors import InvalidValueError, ShapeError, UnsupportedShapeError


def check_weight_matrix(w, name: str = "w", allow_empty: bool = False) -> np.ndarray:
    """Validate and return ``w`` as a 2-D float64 C-contiguous array.

    32-bit float input is widened; NaN/Inf entries are rejected.
    ``allow_empty`` admits 0-row/0-column shapes, which arise from
    prune-everything selections.
    """
    arr = np.asarray(w)
    if arr.ndim != 2:
        raise UnsupportedShapeError(f"{name}: expected 2-D array, got ndim={arr.ndim}")
    if arr.dtype.kind != "f":
        raise UnsupportedShapeError(f"{name}: expected float dtype, got {arr.dtype}")
    if not allow_empty and (arr.shape[0] < 1 or arr.shape[1] < 1):
        raise UnsupportedShapeError(f"{name}: empty dimension in shape {arr.shape}")
    arr = np.ascontiguousarray(arr, dtype=np.float64)
    if not np.isfinite(arr).all():
        raise InvalidValueError(f"{name}: non-finite entry")
    return arr


def check_same_shape(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise ShapeError(f"shape mismatch: {a.shape} vs {b.shape}")


def check_chainable(w: np.ndarray, nxt: np.ndarray) -> None:
    """The successor layer must consume exactly the outputs of ``w``."""
    if nxt.shape[1] != w.shape[0]:
        raise ShapeError(
            f"next layer has {nxt.shape[1]} input columns but layer has "
            f"{w.shape[0]} output rows"
        )
