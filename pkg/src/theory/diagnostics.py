"""理论诊断量

不相干度、δ 间隙、Wedin 残差、典范角、f(Z) 的显式 Hessian，
以及误差分解中的投影误差与估计误差。
"""
import logging
from typing import Sequence, Tuple

import numpy as np

from src.common.config import config
from src.common.errors import AssumptionViolation, RankError, ShapeError, SizeError
from src.linalg.matrix import DenseMatrix, as_matrix, check_orthonormal
from src.linalg.svd import SvdFactors, spectral_norm, svd_full

logger = logging.getLogger(__name__)

_EPS = np.finfo(np.float64).eps


def rank_r_factors(x: DenseMatrix, r: int) -> SvdFactors:
    """rank-r 因子；σ_r 数值为零时报 RankError"""
    x = as_matrix(x)
    available = min(x.shape)
    if not 1 <= r <= available:
        raise RankError(f"rank {r} outside [1, {available}]", requested=r, available=available)
    factors = svd_full(x)
    sigma = factors.sigma
    if sigma[0] == 0.0 or sigma[r - 1] <= max(x.shape) * _EPS * sigma[0]:
        raise RankError(f"matrix has numerical rank below r={r}", requested=r)
    return factors.truncate(r)


def incoherence(x: DenseMatrix, r: int) -> float:
    """μ(X) = max(max_i (n/r)‖u_i‖², max_j (m/r)‖v_j‖²)"""
    n, m = np.shape(x)
    factors = rank_r_factors(x, r)
    row_u = float(np.max(np.sum(np.square(factors.u), axis=1)))
    row_v = float(np.max(np.sum(np.square(factors.vt), axis=0)))
    return max(n / r * row_u, m / r * row_v)


def delta_gap(m_sigma_r: Sequence[float], qs_sigma_perp: Sequence[float]) -> float:
    """δ = min(min_ij |σ_i(Σ_M) − σ_j(Σ_QS,⊥)|, min σ(Σ_M))"""
    top = np.asarray(m_sigma_r, dtype=np.float64)
    rest = np.asarray(qs_sigma_perp, dtype=np.float64)
    if top.size == 0:
        raise ShapeError("Σ_M must hold at least one singular value")
    delta = float(np.min(top))
    if rest.size:
        delta = min(delta, float(np.min(np.abs(top[:, None] - rest[None, :]))))
    if delta <= config.DELTA_TOL:
        raise AssumptionViolation("singular-value gap assumption fails; bound is vacuous", delta)
    return delta


def effective_gap(qs_sigma: Sequence[float], m_sigma: Sequence[float], r: int) -> float:
    """δ₁ = σ_r(QS) − σ_{r+1}(M)，QS = M − E；可为负，由调用方判断"""
    qs_sigma = np.asarray(qs_sigma, dtype=np.float64)
    m_sigma = np.asarray(m_sigma, dtype=np.float64)
    top = float(qs_sigma[r - 1]) if r <= qs_sigma.size else 0.0
    tail = float(m_sigma[r]) if r < m_sigma.size else 0.0
    return top - tail


def side_information_gap(qs_sigma: Sequence[float], p: int) -> float:
    """δ₂ = σ_p(QS)"""
    qs_sigma = np.asarray(qs_sigma, dtype=np.float64)
    return float(qs_sigma[p - 1]) if p <= qs_sigma.size else 0.0


def sampling_spread(s: DenseMatrix, s_psi: DenseMatrix) -> float:
    """‖(SΨ)†S‖_F；Ψ = I 时等于 √p"""
    return float(np.linalg.norm(np.linalg.pinv(as_matrix(s_psi)) @ as_matrix(s), "fro"))


def coefficient_error_bound(e_f: float, s_psi: DenseMatrix) -> float:
    """最小二乘 Q̂ 的误差上界 ‖E‖_F·‖(SΨ)†‖_F"""
    return float(e_f * np.linalg.norm(np.linalg.pinv(as_matrix(s_psi)), "fro"))


def wedin_residuals(qs: DenseMatrix, m: DenseMatrix, r: int) -> Tuple[np.ndarray, np.ndarray]:
    """R = QS·V_M − U_M·Σ_M，S_resid = (QS)ᵀ·U_M − V_M·Σ_M"""
    qs = np.asarray(qs, dtype=np.float64)
    if qs.shape != np.shape(m):
        raise ShapeError("QS and M differ in shape", expected=np.shape(m), actual=qs.shape)
    available = min(qs.shape)
    if not 1 <= r <= available:
        raise RankError(f"rank {r} outside [1, {available}]", requested=r, available=available)
    factors = svd_full(m).truncate(r)
    u_m, sigma_m, v_m = factors.u, factors.sigma, factors.v
    r_resid = qs @ v_m - u_m * sigma_m
    s_resid = qs.T @ u_m - v_m * sigma_m
    return r_resid, s_resid


def canonical_angles(v1: DenseMatrix, v2: DenseMatrix) -> np.ndarray:
    """典范角（升序），取值 [0, π/2]

    cos θ 由 v1ᵀv2 的奇异值给出并截断到 [−1, 1]；θ < π/4 的角改用
    (I − P₁)v2 的奇异值取 arcsin，小角度时更精确。
    """
    v1 = np.asarray(v1, dtype=np.float64)
    v2 = np.asarray(v2, dtype=np.float64)
    if v1.shape != v2.shape:
        raise ShapeError("subspace bases differ in shape", expected=v1.shape, actual=v2.shape)
    check_orthonormal(v1, "v1")
    check_orthonormal(v2, "v2")

    cosines = np.clip(svd_full(v1.T @ v2).sigma, -1.0, 1.0)
    cos_angles = np.arccos(cosines)
    sines = np.sort(np.clip(svd_full(v2 - v1 @ (v1.T @ v2)).sigma, 0.0, 1.0))
    sin_angles = np.arcsin(sines)
    return np.where(cosines ** 2 > 0.5, sin_angles, cos_angles)


def sin_theta_norm(v1: DenseMatrix, v2: DenseMatrix) -> float:
    """‖sin Θ‖_F = ‖(I − P₁)v2‖_F"""
    v1 = np.asarray(v1, dtype=np.float64)
    v2 = np.asarray(v2, dtype=np.float64)
    return float(np.linalg.norm(v2 - v1 @ (v1.T @ v2)))


def hessian_of_f(u_a: DenseMatrix, v_qs_psi_rows: DenseMatrix) -> np.ndarray:
    """f(Z) 的显式 Hessian（r²×r²，按行主序 vec(Z)）

    H = 2·Σ_{(i,j)∈Ω} vec(u_i v_jᵀ) vec(u_i v_jᵀ)ᵀ，Ω = [n] × C；
    v_qs_psi_rows 为 V̂_QS 中被采样的 d 行 (d×r)。
    """
    u_a = np.asarray(u_a, dtype=np.float64)
    v_rows = np.asarray(v_qs_psi_rows, dtype=np.float64)
    r = u_a.shape[1]
    if v_rows.shape[1] != r:
        raise ShapeError("row factor rank differs from U_A", expected=r, actual=v_rows.shape[1])
    if r > config.HESSIAN_MAX_RANK:
        raise SizeError("explicit Hessian too large", size=r * r, limit=config.HESSIAN_MAX_RANK ** 2)
    outer = np.einsum("ia,jb->ijab", u_a, v_rows).reshape(-1, r * r)
    return 2.0 * outer.T @ outer


def strong_convexity(hessian: DenseMatrix) -> float:
    """α = λ_min(H)/2"""
    return float(np.linalg.eigvalsh(np.asarray(hessian))[0]) / 2.0


def alpha_floor(d: int, m: int) -> float:
    return d / (2.0 * m)


def column_projection_error(m: DenseMatrix, u_a: DenseMatrix) -> float:
    """‖M − P_{U_A}M‖₂²"""
    m = np.asarray(m, dtype=np.float64)
    return spectral_norm(m - u_a @ (u_a.T @ m)) ** 2


def projection_error(m: DenseMatrix, u_a: DenseMatrix, v_qs: DenseMatrix) -> float:
    """‖M − P_{U_A}·M·P_{V̂_QS}‖₂²"""
    m = np.asarray(m, dtype=np.float64)
    projected = u_a @ (u_a.T @ m @ v_qs) @ v_qs.T
    return spectral_norm(m - projected) ** 2


def estimation_error(m: DenseMatrix, u_a: DenseMatrix, v_qs: DenseMatrix, z_hat: DenseMatrix) -> float:
    """‖P_{U_A}·M·P_{V̂_QS} − U_A·Ẑ·V̂_QSᵀ‖₂² = ‖U_AᵀMV̂_QS − Ẑ‖₂²"""
    m = np.asarray(m, dtype=np.float64)
    return spectral_norm(u_a.T @ m @ v_qs - np.asarray(z_hat)) ** 2
