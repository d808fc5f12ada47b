"""Adaptive confidence intervals for current status data observed on a grid."""
from .ci import CiRequest, CiResult, adaptive_interval, compute_c_hat, oracle_interval_chernoff, oracle_interval_gaussian
from .isotonic import ConvexMinorant, gcm, left_slope, pava
from .limits import (
    LimitParams,
    QuantileTable,
    SamplerConfig,
    chernoff_ci_halfwidth,
    gaussian_ci_halfwidth,
    quantiles_boundary,
    sample_boundary_slope,
    sample_chernoff_slope,
)
from .model import (
    BinnedCounts,
    GridSpec,
    ObservationSet,
    StepEstimate,
    bin_observations,
    eval_step,
    locate_anchor,
    naive_is_monotone,
    npmle,
    npmle_via_gcm,
)
from .nuisance import NuisanceError, NuisanceEstimates, estimate_nuisance
from .sim import CoverageReport, ScenarioSpec, ecdf_compare, naive_ordering_rate, run_coverage

__version__ = "0.1.0"
