"""随机数流

统一使用 NumPy PCG64；每个 (seed, role-tag) 对派生一条独立的流，
保证不同矩阵/角色之间互不干扰且跨平台可复现。
"""
import zlib

import numpy as np


def tag_key(tag: str) -> int:
    """角色标签 → 稳定的 32 位整数"""
    return zlib.crc32(tag.encode("utf-8"))


def stream(seed: int, tag: str) -> np.random.Generator:
    """返回 (seed, tag) 对应的独立 Generator"""
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), tag_key(tag)])))
