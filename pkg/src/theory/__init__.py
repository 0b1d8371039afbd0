from src.theory.bounds import (
    BoundInputs,
    column_space_bound,
    projection_bound,
    estimation_bound,
    sample_floor,
    theorem1_bound,
)
from src.theory.diagnostics import (
    alpha_floor,
    canonical_angles,
    coefficient_error_bound,
    column_projection_error,
    delta_gap,
    effective_gap,
    estimation_error,
    hessian_of_f,
    incoherence,
    projection_error,
    sampling_spread,
    side_information_gap,
    sin_theta_norm,
    strong_convexity,
    wedin_residuals,
)
from src.theory.report import build_theory_report

__all__ = [
    "BoundInputs",
    "column_space_bound",
    "projection_bound",
    "estimation_bound",
    "sample_floor",
    "theorem1_bound",
    "alpha_floor",
    "canonical_angles",
    "coefficient_error_bound",
    "column_projection_error",
    "delta_gap",
    "effective_gap",
    "estimation_error",
    "hessian_of_f",
    "incoherence",
    "projection_error",
    "sampling_spread",
    "side_information_gap",
    "sin_theta_norm",
    "strong_convexity",
    "wedin_residuals",
    "build_theory_report",
]
