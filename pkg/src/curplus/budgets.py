"""CUR+ 采样类型与预算

Type 1: (d_r, d_c, |Ω_extra|) = (d, d, 0)
Type 2: (d/2, d/2, 0)
Type 3: (d/2, d/2, d²/4)
行列交叠的元素只计一次。
"""
import logging

from src.common.errors import ArgumentError, RankError
from src.common.models import CurPlusSpec

logger = logging.getLogger(__name__)


def make_type(variant: int, n: int, m: int, d: int, r: int, seed: int, **overrides) -> CurPlusSpec:
    """按类型构造 CurPlusSpec；overrides 透传 step_size / max_iters / grad_tol / hybrid_rows"""
    if variant not in (1, 2, 3):
        raise ArgumentError(f"CUR+ variant must be 1, 2 or 3, got {variant}")
    if variant == 1:
        d_rows = d_cols = d
        extra = 0
    else:
        if d % 2:
            logger.info(f"CUR+ Type {variant}: d={d} 为奇数，d/2 向下取整为 {d // 2}")
        d_rows = d_cols = d // 2
        extra = (d // 2) ** 2 if variant == 3 else 0

    if d_cols < r:
        raise RankError(
            f"CUR+ Type {variant} samples {d_cols} columns < target rank r={r}",
            requested=r,
            available=d_cols,
        )
    if d_cols > m or d_rows > n:
        raise ArgumentError(f"CUR+ Type {variant} with d={d} exceeds matrix size {n}x{m}")

    if overrides.get("hybrid_rows"):
        d_rows = 0
    return CurPlusSpec(d_rows=d_rows, d_cols=d_cols, extra_entries=extra, r=r, seed=seed, variant=variant, **overrides)


def sample_budget(n: int, m: int, d_rows: int, d_cols: int, extra: int) -> int:
    """|行 × 全部列 ∪ 全部行 × 列| + 额外元素"""
    return d_rows * m + n * d_cols - d_rows * d_cols + extra


def cur_error_bound(m: int, n: int, d: int, r: int, sigma_r_plus_1: float) -> float:
    """8·σ²_{r+1}·(1 + 2mn)·(1 + (n+m)/d)"""
    return 8.0 * sigma_r_plus_1 ** 2 * (1.0 + 2.0 * m * n) * (1.0 + (n + m) / d)
