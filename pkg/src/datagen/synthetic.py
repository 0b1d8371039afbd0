"""合成实例 M = QS + E

Q_ij ~ N(0,1)（q_seed），E 由 noise_seed 生成：
- dense-gaussian：E_ij ~ N(0, σ²)，M 满秩
- rank-k：E = σ·L·Rᵀ/√k，L (n×k)、R (m×k) 均为标准正态，秩恰为 k
"""
import logging
import math
from dataclasses import dataclass

import numpy as np

from src.common.models import NoiseMode, SyntheticSpec
from src.common.rng import stream
from src.linalg.matrix import DenseMatrix, as_matrix
from src.polybasis.basis import PolyBasis, build_basis, default_grid

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Instance:
    m_true: DenseMatrix
    q_true: DenseMatrix
    s: PolyBasis
    e_true: DenseMatrix
    spec: SyntheticSpec

    @property
    def qs(self) -> np.ndarray:
        return self.q_true @ self.s.matrix


def generate_noise(spec: SyntheticSpec) -> np.ndarray:
    shape = (spec.n, spec.m)
    if spec.noise_sigma == 0.0:
        return np.zeros(shape)
    if spec.noise_mode is NoiseMode.RANK_K:
        k = int(spec.noise_rank)
        left = stream(spec.noise_seed, "noise-left").standard_normal((spec.n, k))
        right = stream(spec.noise_seed, "noise-right").standard_normal((spec.m, k))
        return spec.noise_sigma * (left @ right.T) / math.sqrt(k)
    return spec.noise_sigma * stream(spec.noise_seed, "noise").standard_normal(shape)


def generate(spec: SyntheticSpec) -> Instance:
    grid = spec.grid if spec.grid is not None else default_grid(spec.m)
    basis = build_basis(grid, spec.degree)
    q = stream(spec.q_seed, "q").standard_normal((spec.n, spec.degree + 1))
    e = generate_noise(spec)
    m = q @ basis.matrix + e
    logger.debug(
        f"生成实例: n={spec.n}, m={spec.m}, l={spec.degree}, σ={spec.noise_sigma}, "
        f"noise={spec.noise_mode.value}, seeds=({spec.q_seed}, {spec.noise_seed})"
    )
    return Instance(
        m_true=as_matrix(m, copy=False),
        q_true=as_matrix(q, copy=False),
        s=basis,
        e_true=as_matrix(e, copy=False),
        spec=spec,
    )
