"""Denoising of time-varying graph signals in fractional joint
time-vertex transform domains.

Two routes to a denoiser:

* model-driven: closed-form optimal diagonal filtering in the joint
  fractional domain plus a grid search over the pair of fraction orders
  (:func:`jfrff.wiener.grid_search`, :class:`JFRFTWienerDenoiser`);
* data-driven: stacks of learnable fractional filtering layers trained
  with analytic gradients (:func:`jfrff.network.train`,
  :class:`JFRFFNetDenoiser`, :class:`GFRFFNetDenoiser`).
"""

__version__ = "0.1.0"

from .dfrft import DfrftOperator, build_dfrft_operator
from .errors import (
    BranchCutError,
    CapacityError,
    CsvParseError,
    DegenerateInputError,
    FingerprintMismatchError,
    IllConditionedBasisError,
    JfrffError,
    RankDeficiencyError,
    SingularMatrixError,
    StaleTapeError,
)
from .estimators import GFRFFNetDenoiser, JFRFFNetDenoiser, JFRFTWienerDenoiser
from .gfrft import GfrftOperator, build_gfrft_operator
from .graphs import (
    SHIFT_KINDS,
    Graph,
    build_correlation_adjacency,
    build_distance_adjacency,
    build_knn_adjacency,
    shift_operator,
)
from .jfrft import JointOperator
from .spectral import SpectralBasis, eigendecompose
from .wiener import (
    DiagonalFilter,
    SecondOrderStats,
    apply_filter,
    empirical_stats,
    grid_search,
    optimal_diagonal_filter,
)

__all__ = [
    "__version__",
    "BranchCutError",
    "CapacityError",
    "CsvParseError",
    "DegenerateInputError",
    "DfrftOperator",
    "DiagonalFilter",
    "FingerprintMismatchError",
    "GFRFFNetDenoiser",
    "GfrftOperator",
    "Graph",
    "IllConditionedBasisError",
    "JFRFFNetDenoiser",
    "JFRFTWienerDenoiser",
    "JfrffError",
    "JointOperator",
    "RankDeficiencyError",
    "SHIFT_KINDS",
    "SecondOrderStats",
    "SingularMatrixError",
    "SpectralBasis",
    "StaleTapeError",
    "apply_filter",
    "build_correlation_adjacency",
    "build_dfrft_operator",
    "build_distance_adjacency",
    "build_gfrft_operator",
    "build_knn_adjacency",
    "eigendecompose",
    "empirical_stats",
    "grid_search",
    "optimal_diagonal_filter",
    "shift_operator",
]
