from src.linalg.matrix import (
    DenseMatrix,
    as_matrix,
    check_orthonormal,
    frobenius_norm,
    orthonormality_deviation,
    projector,
)
from src.linalg.svd import BACKENDS, SvdFactors, spectral_norm, svd_full, svd_truncated

__all__ = [
    "DenseMatrix",
    "as_matrix",
    "check_orthonormal",
    "frobenius_norm",
    "orthonormality_deviation",
    "projector",
    "BACKENDS",
    "SvdFactors",
    "spectral_norm",
    "svd_full",
    "svd_truncated",
]
