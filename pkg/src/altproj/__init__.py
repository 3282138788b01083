"""Alternating projections with exact and inexact projections, sampled regularity constants and rate-bound checks."""

from .analysis import BoundReport, RateEstimate, bound_dil, bound_uniform, compare, compare_all, estimate_rate
from .errors import DomainError, HypothesisViolation, NoRateError, NumericalFailure, ScenarioError
from .geometry import Cone, nnls, projection_angle_gap
from .iterate import (
    InexactnessPolicy,
    IterationTrace,
    alternating,
    distance_decrease,
    run_sigma_monotone,
    run_tau_sigma,
    sigma_project,
    tau_sigma_project,
)
from .regularity import (
    RadiusLadder,
    RegularityReport,
    SamplingConfig,
    b_super_regularity_modulus,
    check_qualification,
    estimate_all,
    estimate_c1_blpw,
    estimate_c2,
    estimate_c3_nr,
    estimate_c4_theta4,
    estimate_c_uniform,
    super_regularity_modulus,
)
from .sets import (
    AffineSubspace,
    Ball,
    ConvexPolygon,
    Halfspace,
    PiecewiseLinearSet,
    SetOracle,
    Union,
    diagonal_line,
    line,
    project,
    proximal_normal_cone,
    ray,
    ray_union,
    restricted_proximal_normal_cone,
    sawtooth_graph,
    segment,
    segment_union,
)

__version__ = "0.1.0"
