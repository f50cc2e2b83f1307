"""foldkit: calibration-free structured pruning and model folding.

Weight-matrix compression as orthogonal projections: pruning projects
onto coordinate axes, folding onto cluster-indicator subspaces, and the
dominance of folding over pruning is machine-checked per rank.
"""

from .projection import (
    ClusterAssignment,
    PruneSelection,
    apply_projection,
    fold_projection,
    fold_rows,
    prune_projection,
)
from .clustering import KMeansResult, init_assignment, kmeans_exact, kmeans_hartigan
from .compress import (
    CompressedLayerPair,
    compress_checkpoint,
    fold_merge_pair,
    magnitude_select,
    optimal_fold,
    prune_drop_pair,
    singleton_fold,
)
from .analysis import (
    RankSweepReport,
    delta_method,
    delta_rank,
    recon_error_sq,
    sweep_report,
    verify_theorems,
)
from .matrixio import Checkpoint, load_checkpoint, read_array, save_checkpoint, write_array
from .toynet import EvalBatch, ToyMLP, fold_equivalence_check, forward, loss_perturbation, mse_loss
from .estimators import HartiganKMeans, MagnitudePruner, WeightFolder

__version__ = "0.1.0"

__all__ = [
    "ClusterAssignment",
    "PruneSelection",
    "apply_projection",
    "fold_projection",
    "fold_rows",
    "prune_projection",
    "KMeansResult",
    "init_assignment",
    "kmeans_exact",
    "kmeans_hartigan",
    "CompressedLayerPair",
    "compress_checkpoint",
    "fold_merge_pair",
    "magnitude_select",
    "optimal_fold",
    "prune_drop_pair",
    "singleton_fold",
    "RankSweepReport",
    "delta_method",
    "delta_rank",
    "recon_error_sq",
    "sweep_report",
    "verify_theorems",
    "Checkpoint",
    "load_checkpoint",
    "read_array",
    "save_checkpoint",
    "write_array",
    "EvalBatch",
    "ToyMLP",
    "fold_equivalence_check",
    "forward",
    "loss_perturbation",
    "mse_loss",
    "HartiganKMeans",
    "MagnitudePruner",
    "WeightFolder",
    "__version__",
]
