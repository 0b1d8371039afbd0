"""奇异值分解

三条独立实现：
- golub-kahan：Householder 双对角化 + 隐式 Wilkinson 位移 QR（主路径）
- jacobi：单边 Jacobi（正确性参照）
- lapack：numpy.linalg.svd（外部参照）

默认后端由 config.SVD_BACKEND 决定。
"""
import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
import scipy.linalg

from src.common.config import config
from src.common.errors import ArgumentError, ConvergenceError, RankError
from src.linalg.matrix import DenseMatrix, as_matrix

logger = logging.getLogger(__name__)

BACKENDS = ("golub-kahan", "jacobi", "lapack")
_EPS = np.finfo(np.float64).eps


@dataclass(frozen=True)
class SvdFactors:
    """a ≈ u · diag(sigma) · vt，sigma 非增"""
    u: np.ndarray
    sigma: np.ndarray
    vt: np.ndarray

    @property
    def p(self) -> int:
        return int(self.sigma.shape[0])

    def truncate(self, r: int) -> "SvdFactors":
        return SvdFactors(u=self.u[:, :r].copy(), sigma=self.sigma[:r].copy(), vt=self.vt[:r, :].copy())

    def reconstruct(self) -> np.ndarray:
        return (self.u * self.sigma) @ self.vt

    @property
    def v(self) -> np.ndarray:
        return self.vt.T


def svd_full(a: DenseMatrix, backend: Optional[str] = None) -> SvdFactors:
    """薄 SVD，p = min(rows, cols)"""
    a = as_matrix(a)
    backend = backend or config.SVD_BACKEND
    if backend == "golub-kahan":
        return _golub_kahan(a)
    if backend == "jacobi":
        return _one_sided_jacobi(a)
    if backend == "lapack":
        u, s, vt = np.linalg.svd(a, full_matrices=False)
        return SvdFactors(u=u, sigma=s, vt=vt)
    raise ArgumentError(f"unknown SVD backend '{backend}', expected one of {BACKENDS}")


def svd_truncated(a: DenseMatrix, r: int, backend: Optional[str] = None) -> SvdFactors:
    """前 r 个奇异三元组"""
    a = as_matrix(a)
    available = min(a.shape)
    if isinstance(r, bool) or not isinstance(r, (int, np.integer)) or not 1 <= r <= available:
        raise RankError(f"rank {r} outside [1, {available}]", requested=r, available=available)
    return svd_full(a, backend=backend).truncate(int(r))


def spectral_norm(a: DenseMatrix, backend: Optional[str] = None) -> float:
    """σ₁(a)"""
    return float(svd_full(a, backend=backend).sigma[0])


# ---------------------------------------------------------------------------
# Golub–Kahan
# ---------------------------------------------------------------------------

def _householder(x: np.ndarray) -> Tuple[np.ndarray, float, float]:
    """(I − β v vᵀ) x = α e₁"""
    norm = float(np.linalg.norm(x))
    if norm == 0.0:
        return x.copy(), 0.0, 0.0
    alpha = -math.copysign(norm, x[0])
    v = x.copy()
    v[0] -= alpha
    vv = float(v @ v)
    if vv == 0.0:
        return v, 0.0, float(x[0])
    return v, 2.0 / vv, alpha


def _bidiagonalize(x: np.ndarray):
    """x (m×n, m ≥ n) = U · B · Vᵀ，B 上双对角 (d, e)；返回 Uᵀ (n×m) 与 Vᵀ (n×n)"""
    m, n = x.shape
    b = x.copy()
    d = np.zeros(n)
    e = np.zeros(max(n - 1, 0))
    left: List[Tuple[int, np.ndarray, float]] = []
    right: List[Tuple[int, np.ndarray, float]] = []

    for k in range(n):
        vk, beta, alpha = _householder(b[k:, k])
        if beta:
            b[k:, k:] -= beta * np.outer(vk, vk @ b[k:, k:])
            left.append((k, vk, beta))
            d[k] = alpha
        else:
            d[k] = b[k, k]
        if k < n - 1:
            row = b[k, k + 1:]
            if row.size > 1:
                wk, gamma, alpha2 = _householder(row)
                if gamma:
                    b[k:, k + 1:] -= gamma * np.outer(b[k:, k + 1:] @ wk, wk)
                    right.append((k + 1, wk, gamma))
                    e[k] = alpha2
                else:
                    e[k] = b[k, k + 1]
            else:
                e[k] = b[k, k + 1]

    u = np.eye(m, n)
    for k, vk, beta in reversed(left):
        u[k:, :] -= beta * np.outer(vk, vk @ u[k:, :])
    v = np.eye(n)
    for k, wk, gamma in reversed(right):
        v[k:, :] -= gamma * np.outer(wk, wk @ v[k:, :])
    return d, e, np.ascontiguousarray(u.T), np.ascontiguousarray(v.T)


def _givens(f: float, g: float) -> Tuple[float, float, float]:
    """[c s; −s c] [f; g] = [r; 0]"""
    r = math.hypot(f, g)
    if r == 0.0:
        return 1.0, 0.0, 0.0
    return f / r, g / r, r


def _rotate(rows: np.ndarray, i: int, j: int, c: float, s: float) -> None:
    """rows[i] ← c·rows[i] + s·rows[j]，rows[j] ← −s·rows[i] + c·rows[j]"""
    ri = rows[i].copy()
    rows[i] = c * ri + s * rows[j]
    rows[j] = -s * ri + c * rows[j]


def _chase_zero_diagonal(d, e, i: int, hi: int, ut: np.ndarray) -> None:
    """d[i] = 0 (i < hi)：左旋转把 e[i] 推出块外"""
    f = e[i]
    e[i] = 0.0
    for j in range(i + 1, hi + 1):
        c, s, r = _givens(d[j], f)
        d[j] = r
        _rotate(ut, j, i, c, s)
        if j < hi:
            f = -s * e[j]
            e[j] = c * e[j]


def _chase_zero_last(d, e, lo: int, hi: int, vt: np.ndarray) -> None:
    """d[hi] = 0：右旋转把 e[hi−1] 向上消去"""
    f = e[hi - 1]
    e[hi - 1] = 0.0
    for j in range(hi - 1, lo - 1, -1):
        c, s, r = _givens(d[j], f)
        d[j] = r
        _rotate(vt, j, hi, c, s)
        if j > lo:
            f = -s * e[j - 1]
            e[j - 1] = c * e[j - 1]


def _gk_step(d, e, lo: int, hi: int, ut: np.ndarray, vt: np.ndarray) -> None:
    """在 d[lo..hi] 上做一次隐式位移 QR 扫描"""
    t11 = d[hi - 1] ** 2 + (e[hi - 2] ** 2 if hi - 1 > lo else 0.0)
    t12 = d[hi - 1] * e[hi - 1]
    t22 = d[hi] ** 2 + e[hi - 1] ** 2
    half = (t11 - t22) / 2.0
    denom = half + math.copysign(math.hypot(half, t12), half)
    mu = t22 - t12 * t12 / denom if denom != 0.0 else t22

    y = d[lo] ** 2 - mu
    z = d[lo] * e[lo]
    for k in range(lo, hi):
        c, s, r = _givens(y, z)
        if k > lo:
            e[k - 1] = r
        dk, ek = d[k], e[k]
        d[k] = c * dk + s * ek
        e[k] = -s * dk + c * ek
        bulge = s * d[k + 1]
        d[k + 1] = c * d[k + 1]
        _rotate(vt, k, k + 1, c, s)

        c, s, r = _givens(d[k], bulge)
        d[k] = r
        ek, dk1 = e[k], d[k + 1]
        e[k] = c * ek + s * dk1
        d[k + 1] = -s * ek + c * dk1
        _rotate(ut, k, k + 1, c, s)
        if k < hi - 1:
            y = e[k]
            z = s * e[k + 1]
            e[k + 1] = c * e[k + 1]


def _golub_kahan(a: np.ndarray) -> SvdFactors:
    transposed = a.shape[0] < a.shape[1]
    x = np.array(a.T if transposed else a, dtype=np.float64)
    n = x.shape[1]
    d, e, ut, vt = _bidiagonalize(x)

    anorm = float(np.max(np.abs(d)) + (np.max(np.abs(e)) if e.size else 0.0))
    small = _EPS * anorm
    tol = config.SVD_REL_TOL
    max_steps = config.SVD_SWEEP_FACTOR * n * n
    steps = 0

    hi = n - 1
    while hi > 0:
        for i in range(hi):
            if abs(e[i]) <= tol * (abs(d[i]) + abs(d[i + 1])) or abs(e[i]) <= small:
                e[i] = 0.0
        if e[hi - 1] == 0.0:
            hi -= 1
            continue
        lo = hi - 1
        while lo > 0 and e[lo - 1] != 0.0:
            lo -= 1

        zero = next((i for i in range(lo, hi + 1) if abs(d[i]) <= small), None)
        if zero is not None:
            d[zero] = 0.0
            if zero < hi:
                _chase_zero_diagonal(d, e, zero, hi, ut)
            else:
                _chase_zero_last(d, e, lo, hi, vt)
            continue

        steps += 1
        if steps > max_steps:
            logger.warning(f"Golub–Kahan SVD 未收敛: {steps - 1} 次 QR 扫描")
            raise ConvergenceError("Golub-Kahan SVD did not converge", iterations=steps - 1)
        _gk_step(d, e, lo, hi, ut, vt)

    negative = d < 0
    d[negative] = -d[negative]
    vt[negative] *= -1.0
    order = np.argsort(-d, kind="stable")
    d, ut, vt = d[order], ut[order], vt[order]

    if transposed:
        return SvdFactors(u=np.ascontiguousarray(vt.T), sigma=d, vt=ut)
    return SvdFactors(u=np.ascontiguousarray(ut.T), sigma=d, vt=vt)


# ---------------------------------------------------------------------------
# One-sided Jacobi
# ---------------------------------------------------------------------------

def _one_sided_jacobi(a: np.ndarray) -> SvdFactors:
    transposed = a.shape[0] < a.shape[1]
    work = np.array(a.T if transposed else a, dtype=np.float64)
    m, n = work.shape
    cols = np.ascontiguousarray(work.T)  # 行 = 工作矩阵的列
    vrows = np.eye(n)
    tol = config.SVD_REL_TOL
    max_sweeps = config.SVD_SWEEP_FACTOR * n * n
    # 旋转保持 Frobenius 范数；范数低于 floor 的列视为零列
    floor = _EPS * max(m, n) * float(np.linalg.norm(work))

    for sweep in range(max_sweeps):
        rotated = False
        for i in range(n - 1):
            for j in range(i + 1, n):
                alpha = float(cols[i] @ cols[i])
                beta = float(cols[j] @ cols[j])
                gamma = float(cols[i] @ cols[j])
                if min(alpha, beta) <= floor * floor:
                    continue
                if gamma == 0.0 or abs(gamma) <= tol * math.sqrt(alpha * beta):
                    continue
                rotated = True
                zeta = (beta - alpha) / (2.0 * gamma)
                t = math.copysign(1.0, zeta) / (abs(zeta) + math.sqrt(1.0 + zeta * zeta))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = c * t
                _rotate(cols, i, j, c, -s)
                _rotate(vrows, i, j, c, -s)
        if not rotated:
            break
    else:
        logger.warning(f"Jacobi SVD 未收敛: {max_sweeps} 次扫描")
        raise ConvergenceError("one-sided Jacobi SVD did not converge", iterations=max_sweeps)

    sigma = np.sqrt(np.einsum("ij,ij->i", cols, cols))
    order = np.argsort(-sigma, kind="stable")
    sigma, cols, vrows = sigma[order], cols[order], vrows[order]

    nonzero = int(np.sum(sigma > floor))
    u = np.zeros((m, n))
    u[:, :nonzero] = (cols[:nonzero] / sigma[:nonzero, None]).T
    sigma[nonzero:] = 0.0
    if nonzero < n:
        if nonzero == 0:
            u[:, :] = np.eye(m, n)
        else:
            q, _ = scipy.linalg.qr(u[:, :nonzero], mode="full")
            u[:, nonzero:] = q[:, nonzero:n]

    if transposed:
        return SvdFactors(u=np.ascontiguousarray(vrows.T), sigma=sigma, vt=np.ascontiguousarray(u.T))
    return SvdFactors(u=u, sigma=sigma, vt=vrows)
