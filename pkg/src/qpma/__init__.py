from src.qpma.descent import DescentResult, gradient_descent
from src.qpma.solver import (
    QpmaModel,
    constraint_residual,
    estimate_column_space,
    estimate_row_space,
    fit_q,
    fit_z,
    q_closed_form,
    q_gradient,
    q_objective,
    solve,
    z_gradient,
    z_objective,
)

__all__ = [
    "DescentResult",
    "gradient_descent",
    "QpmaModel",
    "constraint_residual",
    "estimate_column_space",
    "estimate_row_space",
    "fit_q",
    "fit_z",
    "q_closed_form",
    "q_gradient",
    "q_objective",
    "solve",
    "z_gradient",
    "z_objective",
]
