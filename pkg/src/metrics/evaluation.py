"""评估指标

NMSE 按 ‖M − M̂‖_F / ‖M‖_F 计算（范数之比，而非平方之比）。
"""
import numpy as np

from src.common.errors import DegenerateMetricError, ShapeError
from src.common.models import EvalResult
from src.linalg.matrix import DenseMatrix, frobenius_norm
from src.linalg.svd import spectral_norm, svd_full


def _difference(m_hat: DenseMatrix, m_true: DenseMatrix) -> np.ndarray:
    m_hat = np.asarray(m_hat, dtype=np.float64)
    m_true = np.asarray(m_true, dtype=np.float64)
    if m_hat.shape != m_true.shape:
        raise ShapeError("estimate and truth differ in shape", expected=m_true.shape, actual=m_hat.shape)
    return m_true - m_hat


def nmse(m_hat: DenseMatrix, m_true: DenseMatrix) -> float:
    diff = _difference(m_hat, m_true)
    denom = frobenius_norm(m_true)
    if denom == 0.0:
        raise DegenerateMetricError("NMSE undefined for an all-zero true matrix")
    return frobenius_norm(diff) / denom


def spectral_sq_error(m_hat: DenseMatrix, m_true: DenseMatrix) -> float:
    """‖M − M̂‖₂²"""
    return spectral_norm(_difference(m_hat, m_true)) ** 2


def numerical_rank(x: DenseMatrix, rel_tol: float = 1e-10) -> int:
    sigma = svd_full(x).sigma
    if sigma[0] == 0.0:
        return 0
    return int(np.sum(sigma > rel_tol * sigma[0]))


def evaluate(m_hat: DenseMatrix, m_true: DenseMatrix) -> EvalResult:
    diff = _difference(m_hat, m_true)
    return EvalResult(
        nmse=nmse(m_hat, m_true),
        sq_spectral_err=spectral_norm(diff) ** 2,
        sq_frobenius_err=float(np.sum(np.square(diff))),
        rank_of_estimate=numerical_rank(m_hat),
    )
