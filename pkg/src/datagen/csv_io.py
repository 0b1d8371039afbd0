"""矩阵 CSV 读写

格式：每行一个矩阵行，逗号分隔的十进制实数；可选首行注释 `# rows cols`。
写出使用 17 位有效数字，读回逐位一致。
"""
import csv
import logging
from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np

from src.common.config import config
from src.common.errors import ParseError
from src.linalg.matrix import DenseMatrix, as_matrix

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def _parse_header(text: str, line: int) -> Tuple[int, int]:
    parts = text.lstrip("#").split()
    if len(parts) != 2:
        raise ParseError(f"shape comment must be '# rows cols', got '{text.strip()}'", line)
    try:
        rows, cols = int(parts[0]), int(parts[1])
    except ValueError:
        raise ParseError(f"shape comment must hold two integers, got '{text.strip()}'", line)
    if rows < 1 or cols < 1:
        raise ParseError(f"shape comment must be positive, got {rows}x{cols}", line)
    return rows, cols


def load_csv(path: PathLike) -> DenseMatrix:
    """读取矩阵；缺少形状注释时从内容推断"""
    path = Path(path)
    declared: Optional[Tuple[int, int]] = None
    values: List[List[float]] = []
    width: Optional[int] = None

    with path.open("r", encoding="utf-8", newline="") as handle:
        for line_no, row in enumerate(csv.reader(handle), start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            if row[0].lstrip().startswith("#"):
                if values or declared is not None:
                    raise ParseError("shape comment must be the first line", line_no)
                declared = _parse_header(",".join(row), line_no)
                continue
            try:
                parsed = [float(cell) for cell in row]
            except ValueError:
                raise ParseError(f"non-numeric value in row {row!r}", line_no)
            if width is None:
                width = len(parsed)
            elif len(parsed) != width:
                raise ParseError(f"row has {len(parsed)} values, expected {width}", line_no)
            if declared is not None and len(parsed) != declared[1]:
                raise ParseError(f"row has {len(parsed)} values, header declares {declared[1]}", line_no)
            values.append(parsed)

    if not values:
        raise ParseError("file contains no matrix rows", 1)
    if declared is not None and len(values) != declared[0]:
        raise ParseError(f"found {len(values)} rows, header declares {declared[0]}", 1)
    logger.debug(f"读取矩阵 {path}: {len(values)}x{width}")
    return as_matrix(values)


def save_csv(mtx: DenseMatrix, path: PathLike, header: bool = True) -> None:
    """写出矩阵（%.17g）"""
    mtx = np.asarray(mtx, dtype=np.float64)
    if mtx.ndim == 1:
        mtx = mtx.reshape(-1, 1)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as handle:
        if header:
            handle.write(f"# {mtx.shape[0]} {mtx.shape[1]}\n")
        for row in mtx:
            handle.write(",".join(config.FLOAT_FORMAT % value for value in row))
            handle.write("\n")


def load_grid(path: PathLike) -> Tuple[float, ...]:
    """坐标网格文件：每行一个实数"""
    grid: List[float] = []
    with Path(path).open("r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            try:
                grid.append(float(text))
            except ValueError:
                raise ParseError(f"grid value '{text}' is not a real number", line_no)
    if not grid:
        raise ParseError("grid file is empty", 1)
    return tuple(grid)
