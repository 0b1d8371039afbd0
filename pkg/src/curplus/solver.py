"""CUR+ 基线

Û 取采样列的 rank-r 左奇异向量，V̂ 取采样行的 rank-r 右奇异向量，
Ẑ 在观测集 Ω 上用与 QPMA 相同的梯度下降求解：
    min_Z Σ_{(i,j)∈Ω} (M_ij − û_iᵀ Z v̂_j)²
求解器只通过 EntryOracle 读取 Ω 内的元素。
"""
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Protocol, Sequence, Tuple, Union

import numpy as np

from src.common.config import config
from src.common.errors import ArgumentError, RankError, SamplingIndexError
from src.common.models import CurPlusSpec
from src.common.rng import stream
from src.linalg.matrix import DenseMatrix, as_matrix
from src.linalg.svd import svd_full
from src.qpma.descent import gradient_descent
from src.qpma.persistence import save_model_dir
from src.sampling.columns import ColumnSampler, sample_uniform
from src.sampling.entries import (
    EntryIndexSet,
    omega_of_columns,
    omega_of_rows,
    sample_entries_uniform,
)

logger = logging.getLogger(__name__)

_EPS = np.finfo(np.float64).eps


class EntryOracle(Protocol):
    """只读矩阵访问接口"""

    @property
    def shape(self) -> Tuple[int, int]: ...

    def columns(self, idx: Sequence[int]) -> np.ndarray: ...

    def rows(self, idx: Sequence[int]) -> np.ndarray: ...

    def entries(self, rows: np.ndarray, cols: np.ndarray) -> np.ndarray: ...


class DenseOracle:
    """把 DenseMatrix 包装为 EntryOracle"""

    def __init__(self, mtx: DenseMatrix):
        self._mtx = as_matrix(mtx)

    @property
    def shape(self) -> Tuple[int, int]:
        return self._mtx.shape

    def columns(self, idx: Sequence[int]) -> np.ndarray:
        return self._mtx[:, list(idx)]

    def rows(self, idx: Sequence[int]) -> np.ndarray:
        return self._mtx[list(idx), :]

    def entries(self, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
        return self._mtx[rows, cols]


@dataclass(frozen=True)
class CurPlusModel:
    u_hat: np.ndarray
    v_hat: np.ndarray
    z_hat: np.ndarray
    m_hat: np.ndarray
    sample_budget: int
    iters: int
    trace: np.ndarray = field(default_factory=lambda: np.zeros(0))
    spec: Optional[CurPlusSpec] = None
    column_indices: Tuple[int, ...] = ()
    row_indices: Tuple[int, ...] = ()


def _top_left(block: np.ndarray, r: int, what: str) -> np.ndarray:
    if min(block.shape) < r:
        raise RankError(f"{what} has shape {block.shape}, cannot support rank r={r}", requested=r, available=min(block.shape))
    factors = svd_full(block)
    sigma = factors.sigma
    if sigma[0] == 0.0 or sigma[r - 1] <= max(block.shape) * _EPS * sigma[0]:
        raise RankError(f"{what} is rank deficient below r={r}", requested=r)
    return np.ascontiguousarray(factors.u[:, :r])


def observed_set(
    n: int,
    m: int,
    row_idx: Sequence[int],
    column_sampler: ColumnSampler,
    extra: int,
    seed: int,
) -> EntryIndexSet:
    """Ω = 行 × [m] ∪ [n] × 列 ∪ 额外随机元素"""
    omega = omega_of_columns(n, column_sampler)
    if len(row_idx):
        omega = omega.union(omega_of_rows(row_idx, m, n))
    if extra:
        omega = omega.union(sample_entries_uniform(n, m, extra, seed, exclude=omega))
    return omega


def _design(u_rows: np.ndarray, v_rows: np.ndarray) -> np.ndarray:
    """|Ω|×r² 设计矩阵，第 k 行为 vec(u_i v_jᵀ)"""
    r = u_rows.shape[1]
    return np.einsum("ka,kb->kab", u_rows, v_rows).reshape(u_rows.shape[0], r * r)


def entry_objective(z: np.ndarray, values: np.ndarray, u_rows: np.ndarray, v_rows: np.ndarray) -> float:
    """Σ_Ω (M_ij − û_iᵀ Z v̂_j)²"""
    residual = values - np.einsum("ka,ab,kb->k", u_rows, z, v_rows)
    return float(residual @ residual)


def entry_gradient(z: np.ndarray, values: np.ndarray, u_rows: np.ndarray, v_rows: np.ndarray) -> np.ndarray:
    residual = values - np.einsum("ka,ab,kb->k", u_rows, z, v_rows)
    return -2.0 * u_rows.T @ (residual[:, None] * v_rows)


def lipschitz_step(u_rows: np.ndarray, v_rows: np.ndarray) -> float:
    """1/(2·λ_max(Σ_Ω vec(u_i v_jᵀ)vec(u_i v_jᵀ)ᵀ))"""
    design = _design(u_rows, v_rows)
    lam = float(np.linalg.eigvalsh(design.T @ design)[-1])
    if lam <= 0.0:
        raise RankError("observed entries carry no information about Z", requested=u_rows.shape[1])
    return 1.0 / (2.0 * lam)


def cur_solve(
    mtx: Union[DenseMatrix, EntryOracle],
    spec: CurPlusSpec,
    columns: Optional[ColumnSampler] = None,
    hybrid_v: Optional[np.ndarray] = None,
) -> CurPlusModel:
    """CUR+ 重建

    Args:
        mtx: 真实矩阵或 EntryOracle（只读取 Ω 内的元素）
        spec: 采样与求解参数
        columns: 配对实验中与 QPMA 共用的列采样器（列数须为 spec.d_cols）
        hybrid_v: hybrid_rows 模式下由 Q̂S 得到的 m×r 行空间基
    """
    oracle = mtx if hasattr(mtx, "entries") else DenseOracle(mtx)
    n, m = oracle.shape
    r = spec.r

    if columns is None:
        columns = sample_uniform(m, spec.d_cols, spec.seed)
    elif columns.d != spec.d_cols or columns.m != m:
        raise SamplingIndexError(f"shared sampler (m={columns.m}, d={columns.d}) does not match spec d_cols={spec.d_cols}, m={m}")
    col_idx = list(columns.indices)

    if spec.hybrid_rows:
        if hybrid_v is None:
            raise ArgumentError("hybrid_rows requires a row-space estimate from Q̂S")
        v_hat = np.asarray(hybrid_v, dtype=np.float64)
        if v_hat.shape != (m, r):
            raise ArgumentError(f"hybrid row basis must be {m}x{r}, got {v_hat.shape}")
        row_idx: List[int] = []
    else:
        if spec.d_rows > n:
            raise SamplingIndexError(f"cannot sample {spec.d_rows} rows from n={n}")
        row_idx = sorted(int(i) for i in stream(spec.seed, "rows").choice(n, size=spec.d_rows, replace=False))
        v_hat = _top_left(oracle.rows(row_idx).T, r, "sampled rows")

    u_hat = _top_left(oracle.columns(col_idx), r, "sampled columns")

    omega = observed_set(n, m, row_idx, columns, spec.extra_entries, spec.seed)
    values = np.asarray(oracle.entries(omega.rows, omega.cols), dtype=np.float64)
    u_rows = u_hat[omega.rows]
    v_rows = v_hat[omega.cols]

    step = spec.step_size or lipschitz_step(u_rows, v_rows)
    grad_tol = spec.grad_tol if spec.grad_tol is not None else config.DEFAULT_GRAD_TOL_REL * float(np.linalg.norm(values))

    z0 = np.zeros((r, r))
    design = _design(u_rows, v_rows)
    result = gradient_descent(
        z0.reshape(1, r * r),
        design.T @ design,
        entry_objective(z0, values, u_rows, v_rows),
        entry_gradient(z0, values, u_rows, v_rows).reshape(1, r * r),
        step,
        spec.max_iters,
        grad_tol,
        label="cur_z",
    )
    z_hat = result.x.reshape(r, r)
    m_hat = u_hat @ z_hat @ v_hat.T

    logger.info(
        f"CUR+ 完成: type={spec.variant}, d_r={len(row_idx)}, d_c={len(col_idx)}, "
        f"|Ω|={len(omega)}, iters={result.iterations}, f={result.final_objective:.3e}"
    )
    return CurPlusModel(
        u_hat=u_hat,
        v_hat=v_hat,
        z_hat=z_hat,
        m_hat=m_hat,
        sample_budget=len(omega),
        iters=result.iterations,
        trace=result.trace,
        spec=spec,
        column_indices=tuple(col_idx),
        row_indices=tuple(row_idx),
    )


def save_cur_model(model: CurPlusModel, directory, extra=None):
    """与 QPMA 相同的目录布局，meta.json 标记 baseline=curplus"""
    meta = {
        "baseline": "curplus",
        "config": model.spec.model_dump(mode="json") if model.spec is not None else None,
        "columns": list(model.column_indices),
        "rows": list(model.row_indices),
        "sample_budget": model.sample_budget,
        "iters_z": model.iters,
        "final_z_objective": float(model.trace[-1]) if len(model.trace) else None,
    }
    meta.update(extra or {})
    return save_model_dir(
        directory,
        {"u_a": model.u_hat, "v_qs": model.v_hat, "z_hat": model.z_hat, "m_hat": model.m_hat},
        meta,
    )
