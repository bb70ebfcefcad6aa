"""Dyadic harmonic analysis on the periodic torus.

Frequency-localized decompositions, weighted function-space quasi-norms,
bilinear multipliers with paraproduct expansions, band-limited assembly
bounds, a triangular dispersive system with its scattering limit, and a
config-driven verification harness.
"""

from .bilinear import (
    BilinearSymbol,
    ParaproductExpansion,
    apply_direct,
    apply_paraproduct,
    build_expansion,
    cm_order_check,
    derivative_budget,
    make_symbol,
    pointwise_product,
)
from .config import ConfigError, ExperimentConfig, config_from_dict, load_config
from .dyadic import LPFamily, TransitionProfile, peetre_check
from .grid import (
    Field,
    FrequencyMultiplier,
    Grid,
    PreconditionError,
    apply_multiplier,
    d_s,
    dilate,
    field_from_json,
    field_to_json,
    j_s,
    radial_multiplier,
    random_band_limited,
)
from .nikolskij import (
    BandLimitedSequence,
    assemble_and_bound,
    convolution_norm_bound,
    dyadic_series_bound,
    generate_sequence,
    peetre_convolution_bound,
    support_check,
)
from .scattering import (
    ConvergenceError,
    EstimateSpec,
    ScatteringProblem,
    cone_check,
    cone_data,
    evolve_linear,
    lambda_min,
    solve_u_closed,
    solve_u_quadrature,
    u_infinity,
    verify_scattering,
)
from .spaces import (
    SpaceSpec,
    besov_norm,
    hardy_norm,
    lifting_check,
    smoothness_threshold,
    sobolev_norm,
    space_norm,
    tl_norm,
)
from .weights import (
    ExponentFunction,
    TauInterval,
    Weight,
    ap_constant,
    ball_family,
    fefferman_stein_check,
    lorentz_norm,
    lp_norm,
    maximal,
    morrey_norm,
    tau_w_estimate,
    variable_lp_norm,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "Grid", "Field", "FrequencyMultiplier", "PreconditionError",
    "apply_multiplier", "radial_multiplier", "d_s", "j_s", "dilate",
    "random_band_limited", "field_to_json", "field_from_json",
    "TransitionProfile", "LPFamily", "peetre_check",
    "Weight", "TauInterval", "ExponentFunction", "ap_constant",
    "tau_w_estimate", "ball_family", "lp_norm", "lorentz_norm",
    "morrey_norm", "variable_lp_norm", "maximal", "fefferman_stein_check",
    "SpaceSpec", "tl_norm", "besov_norm", "hardy_norm", "sobolev_norm",
    "space_norm", "lifting_check", "smoothness_threshold",
    "BilinearSymbol", "make_symbol", "apply_direct", "pointwise_product",
    "cm_order_check", "ParaproductExpansion", "build_expansion",
    "apply_paraproduct", "derivative_budget",
    "BandLimitedSequence", "generate_sequence", "support_check",
    "assemble_and_bound", "peetre_convolution_bound",
    "convolution_norm_bound", "dyadic_series_bound",
    "ScatteringProblem", "EstimateSpec", "ConvergenceError",
    "evolve_linear", "lambda_min", "solve_u_closed", "solve_u_quadrature",
    "u_infinity", "cone_data", "cone_check", "verify_scattering",
    "ExperimentConfig", "ConfigError", "load_config", "config_from_dict",
]
