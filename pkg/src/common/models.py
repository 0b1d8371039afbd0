"""配置与报告数据模型

所有需要校验或 JSON 序列化的值都使用 pydantic v2 模型；
承载 numpy 数组的运行时结果（SvdFactors、QpmaModel 等）使用各模块内的 dataclass。
"""
import math
from enum import Enum
from typing import Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.common.config import config


class ColumnSpaceMethod(str, Enum):
    """列空间估计方式"""
    SVD = "svd"   # A 的 rank-r SVD（默认）
    EIG = "eig"   # A·Aᵀ 的 rank-r 特征分解


class NoiseMode(str, Enum):
    """合成数据噪声模式"""
    DENSE_GAUSSIAN = "dense-gaussian"  # E_ij ~ N(0, σ²)，M 满秩
    RANK_K = "rank-k"                  # 秩为 k 的结构化噪声


class Orientation(str, Enum):
    """真实数据 CSV 的朝向"""
    COLUMNS_ARE_POINTS = "columns-are-points"  # 每列是一个反应路径点
    ROWS_ARE_POINTS = "rows-are-points"        # 每行是一个反应路径点（读入后转置）


class BoundVariant(str, Enum):
    OLD = "old"
    NEW = "new"
    REVISED = "revised"


class ExperimentMode(str, Enum):
    SOLVE = "solve"
    SWEEP_D = "sweep-d"
    SWEEP_NOISE = "sweep-noise"
    SWEEP_MIN_D = "sweep-min-d"
    SWEEP_DR = "sweep-dr"
    THEORY_REPORT = "theory-report"


class Method(str, Enum):
    QPMA = "qpma"
    CUR1 = "cur1"
    CUR2 = "cur2"
    CUR3 = "cur3"

    @property
    def cur_variant(self) -> Optional[int]:
        return None if self is Method.QPMA else int(self.value[-1])


class QpmaConfig(BaseModel):
    """QPMA 求解参数"""
    model_config = ConfigDict(frozen=True, extra="forbid")

    target_rank: int = Field(..., ge=1, description="目标秩 r")
    degree: int = Field(..., ge=0, description="多项式最高次数 l（S 有 l+1 行）")
    step_size: Optional[float] = Field(None, gt=0, description="fit_q 步长 η；缺省为 1/(2‖SΨ‖₂²)")
    step_size_z: Optional[float] = Field(None, gt=0, description="fit_z 步长；缺省为 1/(2‖V̂ᵀΨ‖₂²‖U_A‖₂²)")
    max_iters: int = Field(default=config.DEFAULT_MAX_ITERS, ge=1, description="最大迭代次数 T")
    grad_tol: Optional[float] = Field(None, ge=0, description="梯度 Frobenius 范数阈值；缺省为 1e-10·‖A‖_F")
    seed: int = Field(0, ge=0, description="Q̂₁ 初始化种子")
    normalize_basis: bool = Field(False, description="S 每行归一化为单位范数")
    column_space_method: ColumnSpaceMethod = Field(ColumnSpaceMethod.SVD)


class CurPlusSpec(BaseModel):
    """CUR+ 采样与求解参数"""
    model_config = ConfigDict(frozen=True, extra="forbid")

    d_rows: int = Field(..., ge=0, description="采样行数")
    d_cols: int = Field(..., ge=1, description="采样列数")
    extra_entries: int = Field(0, ge=0, description="额外随机元素数 |Ω_extra|")
    r: int = Field(..., ge=1, description="目标秩")
    seed: int = Field(0, ge=0)
    step_size: Optional[float] = Field(None, gt=0, description="缺省为逆 Lipschitz 常数")
    max_iters: int = Field(default=config.DEFAULT_MAX_ITERS, ge=1)
    grad_tol: Optional[float] = Field(None, ge=0)
    hybrid_rows: bool = Field(False, description="用 Q̂S 的行代替真实采样行估计行空间")
    variant: Optional[int] = Field(None, ge=1, le=3, description="Type 1/2/3，手工指定时为空")

    @model_validator(mode="after")
    def _column_rank(self) -> "CurPlusSpec":
        if self.d_cols < self.r:
            raise ValueError(f"d_cols={self.d_cols} < r={self.r}: column factor under-determined")
        return self


class SyntheticSpec(BaseModel):
    """合成实例参数：M = QS + E"""
    model_config = ConfigDict(frozen=True, extra="forbid")

    n: int = Field(..., ge=1)
    m: int = Field(..., ge=1)
    degree: int = Field(..., ge=0, description="生成用多项式次数 l")
    grid: Optional[List[float]] = Field(None, description="坐标网格，缺省为 1+0.01·[m]")
    q_seed: int = Field(1, ge=0)
    noise_sigma: float = Field(0.0, ge=0)
    noise_seed: int = Field(2, ge=0)
    noise_mode: NoiseMode = Field(NoiseMode.DENSE_GAUSSIAN)
    noise_rank: Optional[int] = Field(None, ge=1, description="rank-k 模式下的 k")

    @model_validator(mode="after")
    def _consistent(self) -> "SyntheticSpec":
        if self.grid is not None:
            if len(self.grid) != self.m:
                raise ValueError(f"grid has {len(self.grid)} points but m={self.m}")
            if not all(math.isfinite(x) for x in self.grid):
                raise ValueError("grid values must be finite")
        if self.noise_mode is NoiseMode.RANK_K:
            if self.noise_rank is None:
                raise ValueError("noise_rank is required for rank-k noise")
            if self.noise_rank > min(self.n, self.m):
                raise ValueError(f"noise_rank={self.noise_rank} exceeds min(n, m)={min(self.n, self.m)}")
        return self

    @property
    def k_proxy(self) -> int:
        """真实秩的代理值（用于结果表）"""
        structured = min(self.degree + 1, self.m, self.n)
        if self.noise_sigma == 0:
            return structured
        if self.noise_mode is NoiseMode.RANK_K:
            return min(structured + (self.noise_rank or 0), self.n, self.m)
        return min(self.n, self.m)


class DataSpec(BaseModel):
    """实验数据来源：合成规格或真实 CSV（二选一）"""
    model_config = ConfigDict(extra="forbid")

    synthetic: Optional[SyntheticSpec] = None
    path: Optional[str] = Field(None, description="真实矩阵 CSV 路径")
    orientation: Orientation = Field(Orientation.COLUMNS_ARE_POINTS)
    grid_file: Optional[str] = Field(None, description="真实数据的坐标网格文件（每行一个实数）")

    @model_validator(mode="after")
    def _one_source(self) -> "DataSpec":
        if (self.synthetic is None) == (self.path is None):
            raise ValueError("exactly one of 'synthetic' or 'path' must be given")
        return self


class ExperimentConfig(BaseModel):
    """一次 CLI 运行的完整配置（单个 JSON 文件）"""
    model_config = ConfigDict(extra="forbid")

    mode: ExperimentMode
    data: DataSpec
    qpma: QpmaConfig
    methods: List[Method] = Field(default_factory=lambda: [Method.QPMA])
    d: Optional[int] = Field(None, ge=1, description="solve/theory-report/sweep-noise 的采样列数")
    columns: Optional[List[int]] = Field(None, description="显式采样列（solve 模式）")
    d_values: List[int] = Field(default_factory=list, description="sweep-d 的 d 取值")
    d_cols: Optional[int] = Field(None, ge=1, description="sweep-dr 固定的采样列数")
    d_rows_values: List[int] = Field(default_factory=list, description="sweep-dr 的 d_r 取值")
    noise_sigmas: List[float] = Field(default_factory=list, description="sweep-noise 的 σ 取值")
    ranks: List[int] = Field(default_factory=list, description="sweep-min-d 的 r 取值")
    success_nmse: float = Field(1e-6, gt=0, description="sweep-min-d 成功阈值")
    trials: int = Field(1, ge=1)
    seed: int = Field(0, ge=0, description="试验种子基数")
    output_dir: Optional[str] = None
    threads: int = Field(1, ge=1)
    save_models: bool = False
    one_based: bool = False
    force: bool = False
    hybrid_rows: bool = False
    record_wallclock: bool = Field(False, description="在 results.csv 中写入耗时（破坏逐位可复现）")
    bound_variant: BoundVariant = Field(BoundVariant.NEW)
    t1: Optional[float] = Field(None, gt=0)
    t2: Optional[float] = Field(None, gt=0)


class EvalResult(BaseModel):
    """评估指标"""
    nmse: float = Field(..., ge=0)
    sq_spectral_err: float = Field(..., ge=0)
    sq_frobenius_err: float = Field(..., ge=0)
    rank_of_estimate: int = Field(..., ge=0)


class BoundBreakdown(BaseModel):
    """误差界的逐项分解"""
    variant: BoundVariant
    terms: Dict[str, float] = Field(default_factory=dict)
    total: float


class TheoryReport(BaseModel):
    """理论诊断量（扁平 JSON）；真值不可得的项为 None"""
    n: int
    m: int
    r: int
    d: int
    mu: Optional[float] = Field(None, description="M 的不相干度")
    mu_hat: Optional[float] = Field(None, description="M̂ 的不相干度")
    delta: Optional[float] = Field(None, description="奇异值间隙 δ")
    sigma_1: Optional[float] = None
    sigma_r_plus_1: Optional[float] = None
    r_resid_f: Optional[float] = Field(None, description="‖R‖_F")
    s_resid_f: Optional[float] = Field(None, description="‖S_resid‖_F")
    e_f: Optional[float] = Field(None, description="‖E‖_F")
    sin_theta_f: Optional[float] = Field(None, description="‖sin Θ‖_F（V_M 与 V̂_QS）")
    wedin_lhs: Optional[float] = Field(None, description="√(‖sin Θ‖_F²+‖sin Φ‖_F²)（M 与 QS 的 rank-r 子空间）")
    wedin_rhs: Optional[float] = Field(None, description="√(‖R‖_F²+‖S_resid‖_F²)/δ")
    alignment_f: Optional[float] = Field(None, description="‖V̂_Mᵀ V̂_QS − I_r‖_F")
    delta_1: Optional[float] = Field(None, description="σ_r(M − E) − σ_{r+1}(M)")
    delta_2: Optional[float] = Field(None, description="σ_p(QS)，p 为基函数个数")
    delta_s: Optional[float] = Field(None, description="σ_p(QS)/‖(SΨ)†S‖_F")
    d_f: Optional[float] = Field(None, description="‖Q̂ − Q‖_F")
    d_f_bound: Optional[float] = Field(None, description="‖E‖_F·‖(SΨ)†‖_F，Q 的最小二乘误差上界")
    snr: Optional[float] = Field(None, description="δ₁/‖E‖_F + δ₂/‖D‖_F；任一分母为零时为 None")
    lambda_min_h: Optional[float] = Field(None, description="Hessian 最小特征值")
    alpha_floor: float = Field(..., description="d/(2m)")
    sample_floor: Optional[int] = None
    constraint_residual: Optional[float] = None
    column_projection_err: Optional[float] = Field(None, description="‖M − P_{U_A}M‖₂²")
    projection_err: Optional[float] = Field(None, description="‖M − P_{U_A} M P_{V̂_QS}‖₂²")
    estimation_err: Optional[float] = Field(None, description="‖P_{U_A} M P_{V̂_QS} − M̂‖₂²")
    projection_bound: Optional[float] = None
    estimation_bound: Optional[float] = None
    bound_old: Optional[float] = None
    bound_new: Optional[float] = None
    bound_revised: Optional[float] = None
    breakdown_old: Optional[BoundBreakdown] = None
    breakdown_new: Optional[BoundBreakdown] = None
    breakdown_revised: Optional[BoundBreakdown] = None
    measured_sq_spectral_err: Optional[float] = None
    bound_holds: Optional[bool] = None
    unavailable: List[str] = Field(default_factory=list, description="因缺少真值而无法计算的项")


class TrialRecord(BaseModel):
    """results.csv 的一行"""
    mode: ExperimentMode
    method: str
    trial: int = Field(..., ge=0)
    seed: int
    n: int
    m: int
    r: int
    l: int
    k_proxy: Optional[int] = None
    d: Optional[int] = None
    d_rows: Optional[int] = None
    sigma: Optional[float] = None
    noise_ratio: Optional[float] = Field(None, description="‖E‖_F²/‖M‖_F²")
    budget: Optional[int] = Field(None, description="观测元素总数")
    nmse: Optional[float] = None
    sq_spectral_err: Optional[float] = None
    iters: Optional[int] = None
    wallclock: Optional[float] = None
    error: str = ""

    @property
    def ok(self) -> bool:
        return not self.error and self.nmse is not None


RESULT_COLUMNS = [
    "mode", "method", "trial", "seed", "n", "m", "r", "l", "k_proxy", "d", "d_rows",
    "sigma", "noise_ratio", "budget", "nmse", "sq_spectral_err", "iters", "wallclock", "error",
]
