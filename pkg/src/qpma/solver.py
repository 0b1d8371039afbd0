"""QPMA 三阶段求解器

1. 列空间：A 的 rank-r 左奇异向量 U_A
2. 多项式系数：梯度下降最小化 ‖A − Q·SΨ‖_F²，再取 Q̂S 的 rank-r 右奇异向量 V̂_QS
3. 核心矩阵：梯度下降最小化 ‖A − U_A·Z·V̂_QSᵀΨ‖_F²，Ẑ 从零矩阵出发

最终 M̂ = U_A·Ẑ·V̂_QSᵀ。梯度保留因子 2，下降方向为负梯度。
"""
import logging
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Iterator, Optional, Tuple

import numpy as np

from src.common.config import config
from src.common.errors import ColCompleteError, RankError, ShapeError, StageError
from src.common.models import ColumnSpaceMethod, QpmaConfig
from src.common.rng import stream
from src.linalg.matrix import DenseMatrix, as_matrix, check_orthonormal, frobenius_norm
from src.linalg.svd import spectral_norm, svd_full, svd_truncated
from src.polybasis.basis import PolyBasis
from src.qpma.descent import gradient_descent
from src.sampling.columns import ColumnSampler

logger = logging.getLogger(__name__)

_EPS = np.finfo(np.float64).eps


@dataclass(frozen=True)
class QpmaModel:
    u_a: np.ndarray
    q_hat: np.ndarray
    v_qs: np.ndarray
    z_hat: np.ndarray
    m_hat: np.ndarray
    iters_q: int
    iters_z: int
    trace_q: np.ndarray = field(default_factory=lambda: np.zeros(0))
    trace_z: np.ndarray = field(default_factory=lambda: np.zeros(0))
    sampler: Optional[ColumnSampler] = None
    config: Optional[QpmaConfig] = None

    @property
    def final_q_objective(self) -> float:
        return float(self.trace_q[-1])

    @property
    def final_z_objective(self) -> float:
        return float(self.trace_z[-1])


# ---------------------------------------------------------------------------
# Stage 1
# ---------------------------------------------------------------------------

def estimate_column_space(
    a: DenseMatrix,
    r: int,
    method: ColumnSpaceMethod = ColumnSpaceMethod.SVD,
) -> np.ndarray:
    """n×r 列空间基 U_A"""
    method = ColumnSpaceMethod(method)
    if method is ColumnSpaceMethod.SVD:
        return svd_truncated(a, r).u

    a = as_matrix(a)
    available = min(a.shape)
    if not 1 <= r <= available:
        raise RankError(f"rank {r} outside [1, {available}]", requested=r, available=available)
    eigvals, eigvecs = np.linalg.eigh(a @ a.T)
    order = np.argsort(-eigvals, kind="stable")[:r]
    return np.ascontiguousarray(eigvecs[:, order])


# ---------------------------------------------------------------------------
# Stage 2
# ---------------------------------------------------------------------------

def _check_q_shapes(q: np.ndarray, a: np.ndarray, s_psi: np.ndarray) -> None:
    n, d = a.shape
    k = s_psi.shape[0]
    if s_psi.shape[1] != d:
        raise ShapeError("SΨ column count must match A", expected=d, actual=s_psi.shape[1])
    if q.shape != (n, k):
        raise ShapeError("Q has wrong shape", expected=(n, k), actual=q.shape)


def q_objective(q: DenseMatrix, a: DenseMatrix, s_psi: DenseMatrix) -> float:
    """‖A − Q·SΨ‖_F²"""
    q, a, s_psi = np.asarray(q), np.asarray(a), np.asarray(s_psi)
    _check_q_shapes(q, a, s_psi)
    return float(np.sum(np.square(a - q @ s_psi)))


def q_gradient(q: DenseMatrix, a: DenseMatrix, s_psi: DenseMatrix) -> np.ndarray:
    """∇_Q = −2(A − Q·SΨ)(SΨ)ᵀ"""
    q, a, s_psi = np.asarray(q), np.asarray(a), np.asarray(s_psi)
    _check_q_shapes(q, a, s_psi)
    return -2.0 * (a - q @ s_psi) @ s_psi.T


def q_closed_form(a: DenseMatrix, s_psi: DenseMatrix) -> np.ndarray:
    """最小二乘解 Q* = A(SΨ)ᵀ(SΨ(SΨ)ᵀ)⁻¹"""
    solution, *_ = np.linalg.lstsq(np.asarray(s_psi).T, np.asarray(a).T, rcond=None)
    return solution.T


def default_q_step(s_psi: DenseMatrix) -> float:
    return 1.0 / (2.0 * spectral_norm(s_psi) ** 2)


def default_grad_tol(a: DenseMatrix) -> float:
    return config.DEFAULT_GRAD_TOL_REL * frobenius_norm(a)


def fit_q(a: DenseMatrix, s_psi: DenseMatrix, cfg: QpmaConfig) -> Tuple[np.ndarray, np.ndarray]:
    """从 Q̂₁ ~ N(0,1) 出发的梯度下降；返回 (Q̂, 目标值轨迹)"""
    a = as_matrix(a)
    s_psi = as_matrix(s_psi)
    n = a.shape[0]
    k = s_psi.shape[0]
    if s_psi.shape[1] != a.shape[1]:
        raise ShapeError("SΨ column count must match A", expected=a.shape[1], actual=s_psi.shape[1])

    q0 = stream(cfg.seed, "q-init").standard_normal((n, k))
    step = cfg.step_size or default_q_step(s_psi)
    grad_tol = cfg.grad_tol if cfg.grad_tol is not None else default_grad_tol(a)

    result = gradient_descent(
        q0,
        s_psi @ s_psi.T,
        q_objective(q0, a, s_psi),
        q_gradient(q0, a, s_psi),
        step,
        cfg.max_iters,
        grad_tol,
        label="fit_q",
    )
    return result.x, result.trace


def constraint_residual(a: DenseMatrix, q_hat: DenseMatrix, s_psi: DenseMatrix, e_f: float, d: int) -> float:
    """‖A − Q̂SΨ‖_F² − ‖E‖_F²·‖Ψ‖_F²，≤ 0 表示约束成立"""
    return q_objective(q_hat, a, s_psi) - e_f ** 2 * d


def estimate_row_space(q_hat: DenseMatrix, basis: PolyBasis, r: int) -> np.ndarray:
    """Q̂S 的 m×r 右奇异向量 V̂_QS"""
    q_hat = np.asarray(q_hat, dtype=np.float64)
    if q_hat.shape[1] != basis.matrix.shape[0]:
        raise ShapeError("Q̂ column count must match basis rows", expected=basis.matrix.shape[0], actual=q_hat.shape[1])
    qs = q_hat @ basis.matrix
    available = min(qs.shape)
    if not 1 <= r <= available:
        raise RankError(f"rank {r} outside [1, {available}]", requested=r, available=available)
    factors = svd_full(qs)
    sigma = factors.sigma
    if sigma[0] == 0.0 or sigma[r - 1] <= max(qs.shape) * _EPS * sigma[0]:
        numerical_rank = int(np.sum(sigma > max(qs.shape) * _EPS * sigma[0])) if sigma[0] > 0 else 0
        raise RankError(
            f"Q̂S has numerical rank {numerical_rank} < r={r}",
            requested=r,
            available=numerical_rank,
        )
    return np.ascontiguousarray(factors.vt[:r].T)


# ---------------------------------------------------------------------------
# Stage 3
# ---------------------------------------------------------------------------

def _check_z_shapes(z: np.ndarray, a: np.ndarray, u_a: np.ndarray, w: np.ndarray) -> None:
    if u_a.shape[0] != a.shape[0]:
        raise ShapeError("U_A row count must match A", expected=a.shape[0], actual=u_a.shape[0])
    if w.shape[1] != a.shape[1]:
        raise ShapeError("V̂ᵀΨ column count must match A", expected=a.shape[1], actual=w.shape[1])
    if z.shape != (u_a.shape[1], w.shape[0]):
        raise ShapeError("Z has wrong shape", expected=(u_a.shape[1], w.shape[0]), actual=z.shape)


def z_objective(z: DenseMatrix, a: DenseMatrix, u_a: DenseMatrix, v_qs_psi: DenseMatrix) -> float:
    """f(Z) = ‖A − U_A·Z·V̂_QSᵀΨ‖_F²；v_qs_psi 为 r×d 的 V̂_QSᵀΨ"""
    z, a, u_a, w = (np.asarray(x, dtype=np.float64) for x in (z, a, u_a, v_qs_psi))
    _check_z_shapes(z, a, u_a, w)
    return float(np.sum(np.square(a - u_a @ z @ w)))


def z_gradient(z: DenseMatrix, a: DenseMatrix, u_a: DenseMatrix, v_qs_psi: DenseMatrix) -> np.ndarray:
    """∇_Z f = −2·U_Aᵀ(A − U_A·Z·W)Wᵀ"""
    z, a, u_a, w = (np.asarray(x, dtype=np.float64) for x in (z, a, u_a, v_qs_psi))
    _check_z_shapes(z, a, u_a, w)
    return -2.0 * u_a.T @ (a - u_a @ z @ w) @ w.T


def default_z_step(u_a: DenseMatrix, v_qs_psi: DenseMatrix) -> float:
    return 1.0 / (2.0 * spectral_norm(v_qs_psi) ** 2 * spectral_norm(u_a) ** 2)


def fit_z(
    a: DenseMatrix,
    u_a: DenseMatrix,
    v_qs_psi: DenseMatrix,
    cfg: QpmaConfig,
) -> Tuple[np.ndarray, np.ndarray]:
    """从 Z = 0 出发的梯度下降；返回 (Ẑ, 目标值轨迹)

    U_A 列正交时 ∇f(Z + Δ) = ∇f(Z) + 2Δ·W·Wᵀ，下降只依赖 Gram 矩阵 W·Wᵀ。
    """
    a, u_a, w = (as_matrix(x) for x in (a, u_a, v_qs_psi))
    z0 = np.zeros((u_a.shape[1], w.shape[0]))
    _check_z_shapes(z0, a, u_a, w)
    check_orthonormal(u_a, "U_A")

    step = cfg.step_size_z or default_z_step(u_a, w)
    grad_tol = cfg.grad_tol if cfg.grad_tol is not None else default_grad_tol(a)

    result = gradient_descent(
        z0,
        w @ w.T,
        z_objective(z0, a, u_a, w),
        z_gradient(z0, a, u_a, w),
        step,
        cfg.max_iters,
        grad_tol,
        label="fit_z",
    )
    return result.x, result.trace


# ---------------------------------------------------------------------------
# End to end
# ---------------------------------------------------------------------------

def solve(a: DenseMatrix, sampler: ColumnSampler, basis: PolyBasis, cfg: QpmaConfig) -> QpmaModel:
    """从采样列 A 与多项式基 S 重建 M̂ = U_A·Ẑ·V̂_QSᵀ"""
    a = as_matrix(a)
    r = cfg.target_rank
    if a.shape[1] != sampler.d:
        raise ShapeError("A column count must equal sampled column count", expected=sampler.d, actual=a.shape[1])
    if basis.m != sampler.m:
        raise ShapeError("basis column count must equal sampler m", expected=sampler.m, actual=basis.m)
    if basis.degree != cfg.degree:
        raise ShapeError("basis degree differs from configured degree", expected=cfg.degree, actual=basis.degree)
    if r > sampler.d:
        raise RankError(
            f"target rank r={r} exceeds sampled column count d={sampler.d}",
            requested=r,
            available=sampler.d,
        )

    idx = list(sampler.indices)
    s_psi = basis.columns(idx)

    with _stage("column-space"):
        u_a = estimate_column_space(a, r, cfg.column_space_method)
    with _stage("fit-q"):
        q_hat, trace_q = fit_q(a, s_psi, cfg)
    with _stage("row-space"):
        v_qs = estimate_row_space(q_hat, basis, r)
    with _stage("fit-z"):
        z_hat, trace_z = fit_z(a, u_a, v_qs[idx].T, cfg)

    m_hat = u_a @ z_hat @ v_qs.T
    logger.info(
        f"QPMA 完成: n={a.shape[0]}, m={sampler.m}, d={sampler.d}, r={r}, "
        f"iters_q={len(trace_q) - 1}, iters_z={len(trace_z) - 1}, "
        f"f_q={trace_q[-1]:.3e}, f_z={trace_z[-1]:.3e}"
    )
    return QpmaModel(
        u_a=u_a,
        q_hat=q_hat,
        v_qs=v_qs,
        z_hat=z_hat,
        m_hat=m_hat,
        iters_q=len(trace_q) - 1,
        iters_z=len(trace_z) - 1,
        trace_q=trace_q,
        trace_z=trace_z,
        sampler=sampler,
        config=cfg,
    )


@contextmanager
def _stage(name: str) -> Iterator[None]:
    """把阶段内的库异常包装为 StageError"""
    try:
        yield
    except StageError:
        raise
    except ColCompleteError as exc:
        logger.error(f"QPMA 阶段 {name} 失败: {exc}")
        raise StageError(name, exc) from exc
