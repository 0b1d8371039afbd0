"""测试用实例构造"""
from typing import Optional, Sequence

import numpy as np

from src.common.models import SyntheticSpec
from src.datagen.synthetic import Instance, generate


def orthonormal(rows: int, cols: int, seed: int) -> np.ndarray:
    """随机高斯矩阵 QR 得到的列正交基"""
    q, _ = np.linalg.qr(np.random.default_rng(seed).standard_normal((rows, cols)))
    return q


def planted(
    n: int = 40,
    m: int = 40,
    degree: int = 4,
    sigma: float = 0.0,
    q_seed: int = 1,
    noise_seed: int = 2,
    grid: Optional[Sequence[float]] = None,
) -> Instance:
    spec = SyntheticSpec(
        n=n,
        m=m,
        degree=degree,
        grid=list(grid) if grid is not None else None,
        q_seed=q_seed,
        noise_sigma=sigma,
        noise_seed=noise_seed,
    )
    return generate(spec)


def linspace_grid(m: int) -> list:
    return [float(x) for x in np.linspace(-1.0, 1.0, m)]


def central_difference(fun, x: np.ndarray, h: float = 1e-6) -> np.ndarray:
    """逐元素中心差分梯度"""
    grad = np.zeros_like(x)
    for idx in np.ndindex(x.shape):
        step = np.zeros_like(x)
        step[idx] = h
        grad[idx] = (fun(x + step) - fun(x - step)) / (2.0 * h)
    return grad
