"""最小二乘目标上的定步长梯度下降

fit_q、fit_z 与 CUR+ 的核心回归都是 f(X) = c + ‖B − X·W‖_F² 形式的二次目标，
梯度 ∇f(X) = 2(X·G − B·Wᵀ)，G = W·Wᵀ。定步长迭代

    X_{t+1} = X_t − η·∇f(X_t)

满足 ∇f(X_{t+1}) = ∇f(X_t)(I − 2ηG)。在 G 的特征基 G = PΛPᵀ 下各列独立衰减，
第 j 列的缩放因子为 ρ_j = 1 − 2ηλ_j，于是第 t 步的迭代点、目标值与梯度范数都有闭式：

    X_t = X_0 − η·(∇f(X_0)P)·diag(s_t)·Pᵀ,     s_t[j] = Σ_{i<t} ρ_j^i
    f(X_t) = f(X_0) − Σ_j ‖g_j‖²·(1 − ρ_j^{2t})/(4λ_j)
    ‖∇f(X_t)‖² = Σ_j ρ_j^{2t}·‖g_j‖²

其中 g_j 为 ∇f(X_0)P 的第 j 列（λ_j = 0 的列目标值按 η·t·‖g_j‖² 线性下降）。
停止规则与逐步循环一致：第一个满足 ‖∇f(X_t)‖_F ≤ grad_tol 的 t，否则为 max_iters。
目标值上升（超出 MONOTONE_SLACK·max(1, f₀)）即视为步长过大。
"""
import logging
from dataclasses import dataclass

import numpy as np

from src.common.config import config
from src.common.errors import DivergenceError

logger = logging.getLogger(__name__)

_CHUNK_ELEMENTS = 1 << 20


@dataclass
class DescentResult:
    x: np.ndarray
    trace: np.ndarray
    iterations: int = 0
    converged: bool = False

    @property
    def final_objective(self) -> float:
        return float(self.trace[-1])


def _log_rho_sq(x: np.ndarray) -> np.ndarray:
    """log ρ²，ρ = 1 − x"""
    small = x < 0.5
    with np.errstate(divide="ignore"):
        return np.where(small, 2.0 * np.log1p(-np.where(small, x, 0.0)), np.log(np.square(1.0 - x)))


def _partial_sums(x: np.ndarray, t: int) -> np.ndarray:
    """s_t[j] = (1 − ρ_j^t)/x_j，x_j = 0 时为 t"""
    small = (x > 0) & (x < 0.5)
    safe = np.where(small, x, 0.25)
    via_log = -np.expm1(t * np.log1p(-safe)) / safe
    with np.errstate(over="ignore", invalid="ignore"):
        direct = (1.0 - np.power(1.0 - x, float(t))) / np.where(x > 0, x, 1.0)
    return np.where(x > 0, np.where(small, via_log, direct), float(t))


def gradient_descent(
    x0: np.ndarray,
    gram: np.ndarray,
    f0: float,
    grad0: np.ndarray,
    step: float,
    max_iters: int,
    grad_tol: float,
    label: str = "descent",
) -> DescentResult:
    """从 x0 出发的定步长梯度下降，trace[0] 为 f0

    Args:
        x0: 初始点（p×k）
        gram: G = W·Wᵀ（k×k）
        f0: f(x0)
        grad0: ∇f(x0)
        step: 步长 η
        max_iters: 最大迭代次数 T
        grad_tol: 梯度 Frobenius 范数阈值

    Raises:
        DivergenceError: 目标值在某一步上升
    """
    x0 = np.asarray(x0, dtype=np.float64)
    gram = np.asarray(gram, dtype=np.float64)
    lam, basis = np.linalg.eigh(0.5 * (gram + gram.T))
    lam = np.clip(lam, 0.0, None)
    g = np.asarray(grad0, dtype=np.float64) @ basis
    gsq = np.sum(g * g, axis=0)

    x = 2.0 * step * lam
    curved = (gsq > 0.0) & (x > 0.0)
    flat = (gsq > 0.0) & (x == 0.0)
    log_rho_sq = _log_rho_sq(x[curved])
    drop = gsq[curved] / (4.0 * lam[curved])
    flat_rate = step * float(np.sum(gsq[flat]))
    weights = gsq[curved]
    slack = config.MONOTONE_SLACK * max(1.0, abs(f0))

    chunks = [np.array([f0], dtype=np.float64)]
    iterations = max_iters
    converged = float(np.sqrt(gsq.sum())) <= grad_tol
    if converged:
        iterations = 0
    else:
        f_prev = f0
        chunk = max(1024, _CHUNK_ELEMENTS // max(1, len(weights)))
        with np.errstate(over="ignore", invalid="ignore"):
            for start in range(1, max_iters + 1, chunk):
                t = np.arange(start, min(start + chunk, max_iters + 1), dtype=np.float64)
                shrink = np.expm1(np.outer(t, log_rho_sq))  # ρ^{2t} − 1
                f = f0 + shrink @ drop - flat_rate * t
                grad_norm = np.sqrt(np.clip((1.0 + shrink) @ weights + gsq[flat].sum(), 0.0, None))

                hits = np.flatnonzero(grad_norm <= grad_tol)
                stop = int(hits[0]) if hits.size else len(t) - 1
                previous = np.concatenate(([f_prev], f[:stop]))
                rising = np.flatnonzero(~(f[: stop + 1] <= previous + slack))
                if rising.size:
                    i = int(rising[0])
                    logger.warning(f"{label}: 第 {int(t[i])} 次迭代目标值上升 {previous[i]:.6e} -> {f[i]:.6e}")
                    raise DivergenceError(int(t[i]), float(previous[i]), float(f[i]))

                chunks.append(f[: stop + 1])
                f_prev = float(f[stop])
                if hits.size:
                    iterations = int(t[stop])
                    converged = True
                    break

    sums = np.where(gsq > 0.0, _partial_sums(x, iterations), 0.0)
    x_final = x0 - step * (g * sums) @ basis.T

    trace = np.concatenate(chunks)
    logger.debug(f"{label}: 迭代 {iterations} 次, 目标值 {trace[-1]:.6e}, 收敛={converged}")
    return DescentResult(x=x_final, trace=trace, iterations=iterations, converged=converged)
