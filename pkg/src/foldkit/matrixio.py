"""NPY matrix I/O and checkpoint manifests.

Weight matrices travel as plain NPY files (version 1.0, little-endian
float64, C order) so any training stack can produce them without this
package installed. A checkpoint is a JSON manifest listing named layer
files plus an adjacency list of (layer, next_layer) pairs eligible for
compression.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass, field

import numpy as np

from .errors import FormatError, ManifestError, TopologyError, UnsupportedShapeError
from .validation import check_weight_matrix

LAYER_KINDS = ("dense", "conv-flattened")


def read_array(path: str) -> np.ndarray:
    """Read a 2-D float NPY file as a float64 weight matrix.

    32-bit files are widened to 64-bit. Raises FormatError on a malformed
    file, UnsupportedShapeError on wrong rank/dtype, InvalidValueError on
    NaN/Inf.
    """
    if not os.path.exists(path):
        raise FileNotFoundError(path)
    try:
        arr = np.load(path, allow_pickle=False)
    except (ValueError, OSError) as exc:
        raise FormatError(f"{path}: not a valid NPY file: {exc}") from exc
    if arr.ndim != 2:
        raise UnsupportedShapeError(f"{path}: expected 2-D array, got ndim={arr.ndim}")
    if arr.dtype not in (np.float32, np.float64):
        raise UnsupportedShapeError(f"{path}: expected float32/float64, got {arr.dtype}")
    return check_weight_matrix(arr, name=path)


def write_array(w: np.ndarray, path: str) -> None:
    """Write a weight matrix as NPY v1.0, little-endian float64, C order.

    Written atomically (temp file + rename) so readers never observe a
    partial file. read_array(write_array(w)) round-trips bitwise.
    """
    w = check_weight_matrix(w)
    parent = os.path.dirname(os.path.abspath(path))
    try:
        fd, tmp = tempfile.mkstemp(dir=parent, suffix=".npy.tmp")
        try:
            with os.fdopen(fd, "wb") as fh:
                np.lib.format.write_array(fh, w, version=(1, 0))
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


@dataclass
class Checkpoint:
    """Ordered named weight matrices plus the compressible-pair adjacency."""

    names: list[str]
    arrays: dict[str, np.ndarray]
    kinds: dict[str, str]
    adjacency: list[tuple[str, str]] = field(default_factory=list)

    def layer(self, name: str) -> np.ndarray:
        return self.arrays[name]

    def next_of(self, name: str) -> str | None:
        for a, b in self.adjacency:
            if a == name:
                return b
        return None


def _parse_manifest(manifest_path: str) -> dict:
    try:
        with open(manifest_path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ManifestError(f"{manifest_path}: invalid JSON: {exc}") from exc
    if not isinstance(doc, dict) or "layers" not in doc:
        raise ManifestError(f"{manifest_path}: missing 'layers' key")
    return doc


def load_checkpoint(manifest_path: str) -> Checkpoint:
    """Load and validate a checkpoint from its JSON manifest.

    Every referenced file must exist, parse, and match its declared
    (out_dim, in_dim); every adjacency pair must satisfy
    next.in_dim == layer.out_dim.
    """
    doc = _parse_manifest(manifest_path)
    base = os.path.dirname(os.path.abspath(manifest_path))

    names: list[str] = []
    arrays: dict[str, np.ndarray] = {}
    kinds: dict[str, str] = {}
    for entry in doc["layers"]:
        for key in ("name", "file", "kind", "out_dim", "in_dim"):
            if key not in entry:
                raise ManifestError(f"layer entry missing '{key}': {entry}")
        name = entry["name"]
        if name in arrays:
            raise ManifestError(f"duplicate layer name {name!r}")
        if entry["kind"] not in LAYER_KINDS:
            raise ManifestError(f"{name}: unknown kind {entry['kind']!r}")
        path = os.path.join(base, entry["file"])
        w = read_array(path)
        if w.shape != (entry["out_dim"], entry["in_dim"]):
            raise ManifestError(
                f"{name}: file shape {w.shape} does not match declared "
                f"({entry['out_dim']}, {entry['in_dim']})"
            )
        names.append(name)
        arrays[name] = w
        kinds[name] = entry["kind"]

    adjacency: list[tuple[str, str]] = []
    for pair in doc.get("adjacency", []):
        if len(pair) != 2:
            raise ManifestError(f"adjacency entry must be a pair: {pair}")
        a, b = pair
        if a not in arrays or b not in arrays:
            raise TopologyError(f"adjacency ({a}, {b}) references unknown layer")
        if arrays[b].shape[1] != arrays[a].shape[0]:
            raise TopologyError(
                f"adjacency ({a}, {b}): {b} has in_dim {arrays[b].shape[1]} "
                f"but {a} has out_dim {arrays[a].shape[0]}"
            )
        adjacency.append((a, b))

    return Checkpoint(names=names, arrays=arrays, kinds=kinds, adjacency=adjacency)


def save_checkpoint(ckpt: Checkpoint, out_dir: str, manifest_name: str = "manifest.json") -> str:
    """Write all layer arrays plus the manifest into ``out_dir``.

    Returns the manifest path. Layer files are named ``<name>.npy``.
    """
    os.makedirs(out_dir, exist_ok=True)
    layers = []
    for name in ckpt.names:
        w = ckpt.arrays[name]
        fname = f"{name}.npy"
        write_array(w, os.path.join(out_dir, fname))
        layers.append(
            {
                "name": name,
                "file": fname,
                "kind": ckpt.kinds.get(name, "dense"),
                "out_dim": int(w.shape[0]),
                "in_dim": int(w.shape[1]),
            }
        )
    doc = {"layers": layers, "adjacency": [list(p) for p in ckpt.adjacency]}
    manifest_path = os.path.join(out_dir, manifest_name)
    fd, tmp = tempfile.mkstemp(dir=out_dir, suffix=".json.tmp")
    with os.fdopen(fd, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")
    os.replace(tmp, manifest_path)
    return manifest_path
