"""列采样算子 Ψ"""
import json
from dataclasses import dataclass
from typing import Iterable, Tuple

import numpy as np

from src.common.errors import SamplingIndexError, ShapeError
from src.common.rng import stream
from src.linalg.matrix import DenseMatrix, as_matrix


@dataclass(frozen=True)
class ColumnSampler:
    """有序列索引集 C ⊂ {0..m−1}"""
    m: int
    indices: Tuple[int, ...]

    @property
    def d(self) -> int:
        return len(self.indices)

    def selector(self) -> DenseMatrix:
        """显式 Ψ ∈ {0,1}^{m×d}，仅供测试与小规模诊断"""
        psi = np.zeros((self.m, self.d))
        psi[list(self.indices), np.arange(self.d)] = 1.0
        return as_matrix(psi, copy=False)

    def to_json(self) -> str:
        return json.dumps({"m": self.m, "indices": list(self.indices)})

    @classmethod
    def from_json(cls, text: str, one_based: bool = False) -> "ColumnSampler":
        payload = json.loads(text)
        return build_sampler(payload["m"], payload["indices"], one_based=one_based)


def build_sampler(m: int, indices: Iterable[int], one_based: bool = False) -> ColumnSampler:
    """校验并构造采样器；one_based=True 时按 1 起始解释索引

    索引必须严格递增、无重复、在 [0, m) 内。
    """
    if m < 1:
        raise SamplingIndexError(f"column count must be positive, got {m}")
    idx = [int(i) - (1 if one_based else 0) for i in indices]
    if not idx:
        raise SamplingIndexError("sampler needs at least one column")
    if len(set(idx)) != len(idx):
        raise SamplingIndexError(f"duplicate column indices in {idx}")
    bad = [i for i in idx if i < 0 or i >= m]
    if bad:
        raise SamplingIndexError(f"column indices {bad} out of range for m={m}")
    if any(b <= a for a, b in zip(idx, idx[1:])):
        raise SamplingIndexError(f"column indices must be strictly increasing, got {idx}")
    return ColumnSampler(m=m, indices=tuple(idx))


def sample_columns(mtx: DenseMatrix, sampler: ColumnSampler) -> DenseMatrix:
    """A = MΨ，直接按列收集"""
    if mtx.shape[1] != sampler.m:
        raise ShapeError("matrix column count does not match sampler", expected=sampler.m, actual=mtx.shape[1])
    return as_matrix(mtx[:, list(sampler.indices)], copy=False)


def sample_uniform(m: int, d: int, seed: int) -> ColumnSampler:
    """无放回均匀抽取 d 列，结果按升序排列

    等于 nested_order(m, seed) 的前 d 个，同一 seed 下不同 d 的采样器互相嵌套。
    """
    if d < 1 or d > m:
        raise SamplingIndexError(f"cannot draw d={d} distinct columns from m={m}")
    return prefix_sampler(nested_order(m, seed), d)


def nested_order(m: int, seed: int) -> np.ndarray:
    """列的随机排列"""
    return stream(seed, "columns").permutation(m)


def prefix_sampler(order: np.ndarray, d: int) -> ColumnSampler:
    if d < 1 or d > len(order):
        raise SamplingIndexError(f"cannot take d={d} columns from an order of length {len(order)}")
    return ColumnSampler(m=len(order), indices=tuple(int(i) for i in np.sort(order[:d])))
