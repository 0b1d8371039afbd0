from src.curplus.budgets import cur_error_bound, make_type, sample_budget
from src.curplus.solver import (
    CurPlusModel,
    DenseOracle,
    EntryOracle,
    cur_solve,
    entry_gradient,
    entry_objective,
    save_cur_model,
)

__all__ = [
    "cur_error_bound",
    "make_type",
    "sample_budget",
    "CurPlusModel",
    "DenseOracle",
    "EntryOracle",
    "cur_solve",
    "entry_gradient",
    "entry_objective",
    "save_cur_model",
]
