"""多项式侧信息矩阵 S

S 的第 p 行是 s_j^p (p = 0..l)，共 l+1 行。
"""
import logging
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from src.common.errors import ArgumentError
from src.linalg.matrix import DenseMatrix, as_matrix

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PolyBasis:
    grid: Tuple[float, ...]
    degree: int
    matrix: DenseMatrix
    normalized: bool = False
    row_scales: Tuple[float, ...] = ()

    @property
    def m(self) -> int:
        return len(self.grid)

    def columns(self, indices: Sequence[int]) -> DenseMatrix:
        """SΨ"""
        return as_matrix(self.matrix[:, list(indices)], copy=False)


def build_basis(grid: Sequence[float], degree: int, normalize: bool = False) -> PolyBasis:
    """构造 (degree+1)×m 的 Vandermonde 型矩阵

    Args:
        grid: 坐标 s₁..s_m
        degree: 最高次数 l
        normalize: 每行缩放为单位欧氏范数
    """
    values = np.asarray(list(grid), dtype=np.float64)
    if values.size == 0:
        raise ArgumentError("grid must not be empty")
    if degree < 0:
        raise ArgumentError(f"degree must be non-negative, got {degree}")
    if not np.all(np.isfinite(values)):
        raise ArgumentError("grid values must be finite")

    s = np.power(values[None, :], np.arange(degree + 1, dtype=np.float64)[:, None])
    scales: Tuple[float, ...] = ()
    if normalize:
        norms = np.linalg.norm(s, axis=1)
        norms[norms == 0] = 1.0
        s /= norms[:, None]
        scales = tuple(float(x) for x in norms)

    gram = s @ s.T
    cond = float(np.linalg.cond(gram))
    logger.debug(f"多项式基: l={degree}, m={values.size}, cond(SSᵀ)={cond:.3e}")
    if degree + 1 <= values.size and not np.isfinite(cond):
        logger.warning(f"多项式基 SSᵀ 奇异: l={degree}, m={values.size}")

    return PolyBasis(
        grid=tuple(float(x) for x in values),
        degree=degree,
        matrix=as_matrix(s, copy=False),
        normalized=normalize,
        row_scales=scales,
    )


def condition_number(basis: PolyBasis) -> float:
    """cond(S·Sᵀ)"""
    return float(np.linalg.cond(basis.matrix @ basis.matrix.T))


def default_grid(m: int) -> Tuple[float, ...]:
    """[1.01, 1.02, ..., 1 + 0.01·m]"""
    if m < 1:
        raise ArgumentError(f"grid size must be positive, got {m}")
    return tuple(float(x) for x in 1.0 + 0.01 * np.arange(1, m + 1))
