"""Repulsive optimal transport at desk scale.

Integral and supremal transport costs for repulsive (decreasing-in-distance)
pointwise costs, computed exactly for small discrete measures and by
quadrature for radially symmetric ones, together with the concentration-based
lower bounds relating the two costs and per-class constants.
"""

from .bounds import BoundReport, frechet_check, m_frak, main_bound_2, main_bound_n, positivity_check, verify_main
from .classes import (
    ClassConstantReport,
    RadialCDF,
    c_infty_radial,
    discrete_class_constant,
    log_concave_check,
    lower_incomplete_gamma,
    radial_cdf,
    radial_map,
    tail_control_constant,
    tau,
    trim_min_mass_check,
    unimodal_constant,
    unit_ball_volume,
)
from .concentration import (
    concentration_profile,
    kappa,
    kappa_discrete,
    kappa_radial,
    min_enclosing_ball,
    pointwise_concentration,
    r_rho,
)
from .cost import ExpDecayH, HFunction, PowerH, TabulatedH, config_cost, in_b_beta, in_b_upper, parse_h
from .errors import (
    AssumptionViolated,
    DimensionMismatch,
    InstanceTooLarge,
    NotLogConcave,
    NotUnimodal,
    OriginInput,
    OutOfRange,
    QuadratureNotConverged,
    RejectionBudgetExceeded,
    RepotError,
    SchemaError,
    ValidationError,
    WeightTooLarge,
)
from .measures import (
    CauchyProfile,
    DiscreteMeasure,
    GaussianProfile,
    GridExpProfile,
    RadialMeasure,
    UniformProfile,
    ball_mass,
    parse_measure,
    serialize_measure,
)
from .solvers import (
    Coupling,
    SolveReport,
    feasible_on_support,
    min_bad_mass,
    solve_integral,
    solve_supremal,
    transport_vertices,
)

__version__ = "0.1.0"
