"""Shapley-value decompositions of non-linear dependence measures.

Attribute the statistical dependence between a target (labels, model
predictions, or residuals) and a feature table to the individual features,
using distance correlation, its affine-invariant variant, normalized HSIC,
or the multiple-correlation coefficient as the coalition payoff.
"""

from .attribution import (
    AttributionRequest,
    BootstrapSummary,
    DecompositionDiff,
    ShapleyMethod,
    adl,
    adp,
    adr,
    bands_separated,
    bootstrap,
    compare,
    normalize,
)
from .data import DataMatrix, FeatureSubset
from .measures import (
    CharacteristicSpec,
    Measure,
    affine_whiten,
    aidc,
    aidc_sq,
    distance_correlation,
    distance_correlation_sq,
    distance_covariance_sq,
    double_center,
    euclidean_distance_matrix,
    evaluate_characteristic,
    gaussian_kernel_matrix,
    hsic,
    hsic_normalized,
    median_heuristic,
    pearson_correlation_matrix,
    r2_characteristic,
)
from .shapley import (
    BlockPartition,
    Game,
    ShapleyDecomposition,
    block_shapley,
    exact_shapley,
    marginal_contribution_mean,
    monte_carlo_shapley,
)
from .simulate import (
    DgpSample,
    LinearModelFit,
    gen_drift,
    gen_interaction,
    gen_quadratic,
    gen_xor,
    ols_fit,
)

__version__ = "0.1.0"

__all__ = [
    "AttributionRequest",
    "BlockPartition",
    "BootstrapSummary",
    "CharacteristicSpec",
    "DataMatrix",
    "DecompositionDiff",
    "DgpSample",
    "FeatureSubset",
    "Game",
    "LinearModelFit",
    "Measure",
    "ShapleyDecomposition",
    "ShapleyMethod",
    "adl",
    "adp",
    "adr",
    "affine_whiten",
    "aidc",
    "aidc_sq",
    "bands_separated",
    "block_shapley",
    "bootstrap",
    "compare",
    "distance_correlation",
    "distance_correlation_sq",
    "distance_covariance_sq",
    "double_center",
    "euclidean_distance_matrix",
    "evaluate_characteristic",
    "exact_shapley",
    "gaussian_kernel_matrix",
    "gen_drift",
    "gen_interaction",
    "gen_quadratic",
    "gen_xor",
    "hsic",
    "hsic_normalized",
    "marginal_contribution_mean",
    "median_heuristic",
    "monte_carlo_shapley",
    "normalize",
    "ols_fit",
    "pearson_correlation_matrix",
    "r2_characteristic",
]
