"""Kernel copula estimation with boundary correction, uniform-in-bandwidth
deviation statistics and simultaneous confidence bands."""

from .copulas import (
    ClaytonCopula,
    CopulaModel,
    FGMCopula,
    GaussianCopula,
    IndependenceCopula,
    make_copula,
)
from .deviation import (
    BandwidthGrid,
    ConfidenceBand,
    DeviationReport,
    bandwidth_grid,
    confidence_band,
    bandwidth_rate_statistic,
    deviation_field,
    lil_report,
    closeness_statistic,
    rn,
    verify_envelope,
    verify_variance_bound,
)
from .empirical import (
    PairedSample,
    PseudoObservations,
    ecdf_eval,
    empirical_copula,
    empirical_copula_grid,
    empirical_copula_process,
    generalized_inverse,
    pseudo_observations,
    uniform_empirical_cdf,
    uniform_empirical_cdf_grid,
)
from .estimators import (
    LocalLinearCopula,
    MirrorReflectionCopula,
    SurfaceGrid,
    TransformationCopula,
    estimate_on_grid,
    general_estimate,
    interior_lattice,
    local_linear_estimate,
    make_estimator,
    mirror_reflect_points,
    mirror_reflection_estimate,
    mr_partial,
    transformation_estimate,
)
from .kernels import (
    Kernel,
    Transformation,
    boundary_moments,
    get_kernel,
    get_transformation,
    local_linear_cdf,
    local_linear_kernel,
    smoothed_marginal,
)
from .simulate import SimulationResult, simulate_deviations

__version__ = "0.1.0"

__all__ = [
    "BandwidthGrid",
    "ClaytonCopula",
    "ConfidenceBand",
    "CopulaModel",
    "DeviationReport",
    "FGMCopula",
    "GaussianCopula",
    "IndependenceCopula",
    "Kernel",
    "LocalLinearCopula",
    "MirrorReflectionCopula",
    "PairedSample",
    "PseudoObservations",
    "SimulationResult",
    "SurfaceGrid",
    "Transformation",
    "TransformationCopula",
    "bandwidth_grid",
    "boundary_moments",
    "confidence_band",
    "bandwidth_rate_statistic",
    "deviation_field",
    "ecdf_eval",
    "empirical_copula",
    "empirical_copula_grid",
    "empirical_copula_process",
    "estimate_on_grid",
    "general_estimate",
    "generalized_inverse",
    "get_kernel",
    "get_transformation",
    "interior_lattice",
    "lil_report",
    "local_linear_cdf",
    "local_linear_estimate",
    "local_linear_kernel",
    "make_copula",
    "make_estimator",
    "mirror_reflect_points",
    "mirror_reflection_estimate",
    "mr_partial",
    "closeness_statistic",
    "pseudo_observations",
    "rn",
    "simulate_deviations",
    "smoothed_marginal",
    "transformation_estimate",
    "uniform_empirical_cdf",
    "uniform_empirical_cdf_grid",
    "verify_envelope",
    "verify_variance_bound",
]
