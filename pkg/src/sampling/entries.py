"""元素索引集 Ω"""
from dataclasses import dataclass
from typing import Iterable, Optional, Tuple

import numpy as np

from src.common.errors import SamplingIndexError
from src.common.rng import stream
from src.sampling.columns import ColumnSampler


@dataclass(frozen=True)
class EntryIndexSet:
    """n×m 框架内互不重复的 (row, col) 坐标，按行主序排列"""
    n: int
    m: int
    rows: np.ndarray
    cols: np.ndarray

    def __len__(self) -> int:
        return int(self.rows.shape[0])

    @property
    def flat(self) -> np.ndarray:
        return self.rows * self.m + self.cols

    def pairs(self) -> set:
        return set(zip(self.rows.tolist(), self.cols.tolist()))

    def union(self, other: "EntryIndexSet") -> "EntryIndexSet":
        """并集，重叠坐标只计一次"""
        _same_frame(self, other)
        return _from_flat(self.n, self.m, np.union1d(self.flat, other.flat))


def _same_frame(a: EntryIndexSet, b: EntryIndexSet) -> None:
    if (a.n, a.m) != (b.n, b.m):
        raise SamplingIndexError(f"entry sets live in different frames {(a.n, a.m)} vs {(b.n, b.m)}")


def _from_flat(n: int, m: int, flat: np.ndarray) -> EntryIndexSet:
    flat = np.asarray(flat, dtype=np.int64)
    return EntryIndexSet(n=n, m=m, rows=flat // m, cols=flat % m)


def empty_entries(n: int, m: int) -> EntryIndexSet:
    return _from_flat(n, m, np.zeros(0, dtype=np.int64))


def build_entries(n: int, m: int, pairs: Iterable[Tuple[int, int]]) -> EntryIndexSet:
    """校验坐标范围与唯一性"""
    arr = np.array(list(pairs), dtype=np.int64).reshape(-1, 2)
    if arr.size and (np.any(arr < 0) or np.any(arr[:, 0] >= n) or np.any(arr[:, 1] >= m)):
        raise SamplingIndexError(f"entry coordinates out of range for frame {n}x{m}")
    flat = arr[:, 0] * m + arr[:, 1]
    unique = np.unique(flat)
    if unique.size != flat.size:
        raise SamplingIndexError("duplicate entry coordinates")
    return _from_flat(n, m, unique)


def omega_of_columns(n: int, sampler: ColumnSampler) -> EntryIndexSet:
    """{(i, c) : i ∈ [n], c ∈ C}，|Ω| = n·d"""
    if n < 1:
        raise SamplingIndexError(f"row count must be positive, got {n}")
    cols = np.asarray(sampler.indices, dtype=np.int64)
    flat = (np.arange(n, dtype=np.int64)[:, None] * sampler.m + cols[None, :]).ravel()
    return _from_flat(n, sampler.m, np.sort(flat))


def omega_of_rows(rows: Iterable[int], m: int, n: int) -> EntryIndexSet:
    """{(r, j) : r ∈ R, j ∈ [m]}"""
    rows = np.asarray(sorted(rows), dtype=np.int64)
    flat = (rows[:, None] * m + np.arange(m, dtype=np.int64)[None, :]).ravel()
    return _from_flat(n, m, flat)


def sample_entries_uniform(
    n: int,
    m: int,
    count: int,
    seed: int,
    exclude: Optional[EntryIndexSet] = None,
) -> EntryIndexSet:
    """在 exclude 之外均匀抽取 count 个不重复元素"""
    excluded = exclude.flat if exclude is not None else np.zeros(0, dtype=np.int64)
    if exclude is not None and (exclude.n, exclude.m) != (n, m):
        raise SamplingIndexError(f"exclude set frame {(exclude.n, exclude.m)} differs from {(n, m)}")
    available = n * m - excluded.size
    if count < 0 or count > available:
        raise SamplingIndexError(f"cannot draw {count} entries, only {available} available")
    if count == 0:
        return empty_entries(n, m)
    candidates = np.setdiff1d(np.arange(n * m, dtype=np.int64), excluded, assume_unique=True)
    chosen = stream(seed, "entries").choice(candidates, size=count, replace=False)
    return _from_flat(n, m, np.sort(chosen))
