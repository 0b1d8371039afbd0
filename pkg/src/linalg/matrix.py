"""稠密实矩阵辅助函数

DenseMatrix 即二维 float64 numpy 数组；as_matrix 是唯一的构造入口，
负责形状与有限性校验，并把结果设为只读。
"""
from typing import Any

import numpy as np

from src.common.config import config
from src.common.errors import ArgumentError, OrthonormalityError, ShapeError

DenseMatrix = np.ndarray


def as_matrix(data: Any, copy: bool = True) -> DenseMatrix:
    """构造经过校验的只读 DenseMatrix

    一维输入视为单列。拒绝 0×k / k×0 形状和 NaN/Inf。
    """
    arr = np.array(data, dtype=np.float64) if copy else np.asarray(data, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise ShapeError("matrix must be two-dimensional", expected=2, actual=arr.ndim)
    if arr.shape[0] == 0 or arr.shape[1] == 0:
        raise ShapeError("matrix must have at least one row and one column", actual=arr.shape)
    if not np.all(np.isfinite(arr)):
        raise ArgumentError("matrix entries must be finite")
    arr = np.ascontiguousarray(arr)
    arr.setflags(write=False)
    return arr


def frobenius_norm(a: DenseMatrix) -> float:
    return float(np.sqrt(np.sum(np.square(a))))


def orthonormality_deviation(basis: DenseMatrix) -> float:
    """max |BᵀB − I|"""
    gram = basis.T @ basis
    return float(np.max(np.abs(gram - np.eye(gram.shape[0])))) if gram.size else 0.0


def check_orthonormal(basis: DenseMatrix, what: str = "basis") -> None:
    deviation = orthonormality_deviation(basis)
    if deviation > config.TOL_ORTH:
        raise OrthonormalityError(f"{what} columns are not orthonormal", deviation)


def projector(basis: DenseMatrix) -> DenseMatrix:
    """正交投影 P = B·Bᵀ，要求 B 的列正交归一"""
    basis = np.asarray(basis, dtype=np.float64)
    if basis.ndim != 2:
        raise ShapeError("basis must be two-dimensional", expected=2, actual=basis.ndim)
    check_orthonormal(basis)
    return as_matrix(basis @ basis.T, copy=False)


def require_shape(a: DenseMatrix, shape: tuple, what: str) -> None:
    """形状检查；shape 中的 None 表示任意"""
    if a.ndim != 2 or any(e is not None and e != s for e, s in zip(shape, a.shape)):
        raise ShapeError(f"{what} has wrong shape", expected=shape, actual=a.shape)
