"""异常层次

所有库异常都继承自 ColCompleteError；需要和内置异常兼容的类同时继承
对应的内置类型（例如 SamplingIndexError 也是 IndexError）。
"""
from typing import Any, Optional, Sequence


class ColCompleteError(Exception):
    """库内所有异常的基类"""


class ConvergenceError(ColCompleteError, ArithmeticError):
    """迭代算法（SVD）在最大迭代次数内未收敛"""

    def __init__(self, message: str, iterations: int):
        super().__init__(f"{message} (iterations={iterations})")
        self.iterations = iterations


class RankError(ColCompleteError, ValueError):
    """请求的秩超出可用范围，或矩阵秩亏"""

    def __init__(self, message: str, requested: Optional[int] = None, available: Optional[int] = None):
        super().__init__(message)
        self.requested = requested
        self.available = available


class OrthonormalityError(ColCompleteError, ValueError):
    """基矩阵的列不是正交归一的"""

    def __init__(self, message: str, deviation: float):
        super().__init__(f"{message} (deviation={deviation:.3e})")
        self.deviation = deviation


class ShapeError(ColCompleteError, ValueError):
    """矩阵形状不匹配"""

    def __init__(self, message: str, expected: Any = None, actual: Any = None):
        detail = ""
        if expected is not None or actual is not None:
            detail = f" (expected={expected}, actual={actual})"
        super().__init__(f"{message}{detail}")
        self.expected = expected
        self.actual = actual


class SamplingIndexError(ColCompleteError, IndexError):
    """列/元素索引重复、越界或采样数量不可行"""


class ArgumentError(ColCompleteError, ValueError):
    """参数取值非法"""


class DivergenceError(ColCompleteError, ArithmeticError):
    """梯度下降目标值上升（步长过大）"""

    def __init__(self, iteration: int, previous: float, current: float):
        super().__init__(
            f"objective increased at iteration {iteration}: {previous:.6e} -> {current:.6e}; "
            f"step size too large"
        )
        self.iteration = iteration
        self.previous = previous
        self.current = current


class AssumptionViolation(ColCompleteError, ValueError):
    """δ 间隙假设不成立，界是空洞的"""

    def __init__(self, message: str, delta: float):
        super().__init__(f"{message} (delta={delta:.3e})")
        self.delta = delta


class SizeError(ColCompleteError, ValueError):
    """显式构造的矩阵超出规模上限"""

    def __init__(self, message: str, size: int, limit: int):
        super().__init__(f"{message} (size={size}, limit={limit})")
        self.size = size
        self.limit = limit


class ParseError(ColCompleteError, ValueError):
    """CSV 文件格式错误"""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class DegenerateMetricError(ColCompleteError, ZeroDivisionError):
    """指标分母为零（真实矩阵为零矩阵）"""


class ConfigError(ColCompleteError, ValueError):
    """实验配置解析/校验失败"""

    def __init__(self, message: str, path: str = "", field: str = ""):
        location = ".".join(part for part in (path, field) if part)
        super().__init__(f"{location}: {message}" if location else message)
        self.path = path
        self.field = field

    @classmethod
    def from_validation(cls, source: str, errors: Sequence[dict]) -> "ConfigError":
        """从 pydantic ValidationError.errors() 构造，报告首个出错字段"""
        first = errors[0]
        loc = [str(part) for part in first.get("loc", ())]
        field = loc[-1] if loc else ""
        path = ".".join([source] + loc[:-1]) if loc else source
        return cls(first.get("msg", "invalid value"), path=path, field=field)


class StageError(ColCompleteError):
    """求解流水线某一阶段失败，保留原始异常"""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"[{stage}] {type(cause).__name__}: {cause}")
        self.stage = stage
        self.cause = cause
