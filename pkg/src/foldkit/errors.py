"""Exception hierarchy for foldkit."""


class FoldkitError(Exception):
    """Base class for all foldkit errors."""


class FormatError(FoldkitError):
    """File is not a well-formed NPY array file."""


class UnsupportedShapeError(FoldkitError):
    """Array is not a 2-D float matrix."""


class InvalidValueError(FoldkitError):
    """Matrix contains NaN or Inf entries."""


class ManifestError(FoldkitError):
    """Checkpoint manifest is malformed or inconsistent with its files."""


class TopologyError(ManifestError):
    """Adjacency pair violates the layer dimension contract."""


class ShapeError(FoldkitError):
    """Operand dimensions do not match."""


class InvalidBudgetError(FoldkitError):
    """Requested retained size or cluster count is out of range."""


class InstanceTooLargeError(FoldkitError):
    """Exact clustering requested on an instance beyond the enumeration limit."""
