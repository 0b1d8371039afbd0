"""误差界求值

每个界返回 BoundBreakdown（逐项数值 + 总和），三种变体：
- old：以 Wedin 残差 ‖R‖_F、‖S_resid‖_F 表达
- new：以噪声 ‖E‖_F 表达（默认）
- revised：以 δ₁ = σ_r(M − E) − σ_{r+1}(M)、δ₂ = σ_p(QS)、‖D‖_F = ‖Q̂ − Q‖_F
  与 δ_s = σ_p(QS)/‖(SΨ)†S‖_F 表达，p 为基函数个数
"""
import math
from typing import Dict, Optional

from pydantic import BaseModel, ConfigDict, Field

from src.common.config import config
from src.common.errors import ArgumentError, AssumptionViolation
from src.common.models import BoundBreakdown, BoundVariant


class BoundInputs(BaseModel):
    """界公式的输入量"""
    model_config = ConfigDict(frozen=True)

    sigma_1: float = Field(..., ge=0)
    sigma_r_plus_1: float = Field(..., ge=0)
    m: int = Field(..., ge=1)
    n: int = Field(..., ge=1)
    d: int = Field(..., ge=1)
    delta: Optional[float] = None
    r_resid_f: Optional[float] = Field(None, ge=0)
    s_resid_f: Optional[float] = Field(None, ge=0)
    e_f: Optional[float] = Field(None, ge=0)
    alignment_f: float = Field(0.0, ge=0, description="‖V̂_MᵀV̂_QS − I_r‖_F")
    delta_1: Optional[float] = None
    delta_2: Optional[float] = None
    delta_s: Optional[float] = None
    d_f: Optional[float] = Field(None, ge=0, description="‖Q̂ − Q‖_F")


def _check_delta(inputs: BoundInputs) -> None:
    if inputs.delta is None or inputs.delta <= config.DELTA_TOL:
        raise AssumptionViolation("bound requires a positive singular-value gap", inputs.delta or 0.0)


def _gap(value: Optional[float], name: str) -> float:
    if value is None:
        raise ArgumentError(f"revised bound variant needs {name}")
    if value <= config.DELTA_TOL:
        raise AssumptionViolation(f"revised bound requires {name} > 0", value)
    return value


def _residual_sq(inputs: BoundInputs) -> float:
    if inputs.r_resid_f is None or inputs.s_resid_f is None:
        raise ArgumentError("old bound variant needs both Wedin residual norms")
    return inputs.r_resid_f ** 2 + inputs.s_resid_f ** 2


def _noise(inputs: BoundInputs) -> float:
    if inputs.e_f is None:
        raise ArgumentError("noise-based bound variants need ‖E‖_F")
    return inputs.e_f


def _breakdown(variant: BoundVariant, terms: Dict[str, float]) -> BoundBreakdown:
    return BoundBreakdown(variant=variant, terms=terms, total=float(sum(terms.values())))


def _revised_total(inputs: BoundInputs) -> BoundBreakdown:
    delta_1 = _gap(inputs.delta_1, "delta_1")
    delta_s = _gap(inputs.delta_s, "delta_s")
    s1, sr1 = inputs.sigma_1 ** 2, inputs.sigma_r_plus_1 ** 2
    spread = 1.0 + 4.0 * inputs.m / inputs.d
    terms = {
        "tail": 4.0 * sr1 * spread * (3.0 + inputs.n / inputs.d),
        "noise": 64.0 * s1 * _noise(inputs) ** 2 * spread * (1.0 / delta_1 ** 2 + 1.0 / delta_s ** 2),
    }
    return _breakdown(BoundVariant.REVISED, terms)


def _revised_projection(inputs: BoundInputs) -> BoundBreakdown:
    delta_1 = _gap(inputs.delta_1, "delta_1")
    delta_2 = _gap(inputs.delta_2, "delta_2")
    if inputs.d_f is None:
        raise ArgumentError("revised bound variant needs ‖Q̂ − Q‖_F")
    s1, sr1 = inputs.sigma_1 ** 2, inputs.sigma_r_plus_1 ** 2
    terms = {
        "tail": 2.0 * sr1 * (3.0 + (2.0 * inputs.n + 4.0 * inputs.m) / inputs.d),
        "noise": 16.0 * s1 * _noise(inputs) ** 2 / delta_1 ** 2,
        "coefficients": 16.0 * s1 * inputs.d_f ** 2 / delta_2 ** 2,
    }
    return _breakdown(BoundVariant.REVISED, terms)


def theorem1_bound(inputs: BoundInputs, variant: BoundVariant = BoundVariant.NEW) -> BoundBreakdown:
    """‖M − M̂‖₂² 的上界"""
    variant = BoundVariant(variant)
    if variant is BoundVariant.REVISED:
        return _revised_total(inputs)
    _check_delta(inputs)
    s1, sr1 = inputs.sigma_1 ** 2, inputs.sigma_r_plus_1 ** 2
    ratio = inputs.m / inputs.d
    terms = {"tail": sr1 * (2.0 + 8.0 * ratio) * (1.0 + (inputs.n + inputs.m) / inputs.d)}
    if variant is BoundVariant.OLD:
        terms["top"] = 4.0 * s1
        terms["residual"] = s1 * (12.0 + 8.0 * ratio) * _residual_sq(inputs) / inputs.delta ** 2
    else:
        e_f = _noise(inputs)
        terms["noise"] = s1 * (4.0 + 16.0 * ratio) * (
            e_f ** 2 / inputs.delta ** 2 + 2.0 * math.sqrt(2.0) * e_f / inputs.delta
        )
    terms["alignment"] = 4.0 * ratio * inputs.alignment_f ** 2
    return _breakdown(variant, terms)


def projection_bound(inputs: BoundInputs, variant: BoundVariant = BoundVariant.NEW) -> BoundBreakdown:
    """投影误差 ‖M − P_{U_A}MP_{V̂_QS}‖₂² 的上界"""
    variant = BoundVariant(variant)
    if variant is BoundVariant.REVISED:
        return _revised_projection(inputs)
    _check_delta(inputs)
    s1, sr1 = inputs.sigma_1 ** 2, inputs.sigma_r_plus_1 ** 2
    terms = {"tail": 2.0 * sr1 * (1.0 + (inputs.n + inputs.m) / inputs.d)}
    if variant is BoundVariant.OLD:
        terms["residual"] = 2.0 * s1 * _residual_sq(inputs) / inputs.delta ** 2
    else:
        terms["noise"] = 4.0 * s1 * _noise(inputs) ** 2 / inputs.delta ** 2
    return _breakdown(variant, terms)


def estimation_bound(inputs: BoundInputs, variant: BoundVariant = BoundVariant.NEW) -> BoundBreakdown:
    """估计误差 ‖P_{U_A}MP_{V̂_QS} − U_AẐV̂_QSᵀ‖₂² 的上界

    revised 变体没有单独的估计项，由三角不等式
    ‖X − M̂‖² ≤ 2(‖M − X‖² + ‖M − M̂‖²) 从投影界与总误差界得到。
    """
    variant = BoundVariant(variant)
    if variant is BoundVariant.REVISED:
        terms = {
            "projection": 2.0 * _revised_projection(inputs).total,
            "total_error": 2.0 * _revised_total(inputs).total,
        }
        return _breakdown(variant, terms)
    _check_delta(inputs)
    s1, sr1 = inputs.sigma_1 ** 2, inputs.sigma_r_plus_1 ** 2
    ratio = inputs.m / inputs.d
    terms = {"tail": 8.0 * ratio * sr1 * (1.0 + (inputs.n + inputs.m) / inputs.d)}
    if variant is BoundVariant.OLD:
        terms["top"] = 4.0 * s1
        terms["residual"] = s1 * (10.0 + 8.0 * ratio) * _residual_sq(inputs) / inputs.delta ** 2
    else:
        e_f = _noise(inputs)
        terms["noise"] = s1 * (
            2.0 * math.sqrt(2.0) * e_f / inputs.delta + 16.0 * ratio * e_f ** 2 / inputs.delta ** 2
        )
    terms["alignment"] = 4.0 * ratio * inputs.alignment_f ** 2
    return _breakdown(variant, terms)


def column_space_bound(sigma_r_plus_1: float, n: int, d: int) -> float:
    """‖M − P_{U_A}M‖₂² ≤ σ²_{r+1}(1 + 2n/d)"""
    return sigma_r_plus_1 ** 2 * (1.0 + 2.0 * n / d)


def sample_floor(
    mu: float,
    mu_hat: float,
    r: int,
    n: int,
    t1: Optional[float] = None,
    t2: Optional[float] = None,
) -> int:
    """⌈max{7μr(t₁+ln r), 7μ̂²r²(t₂+ln r)/n}⌉，至少为 1；t₁、t₂ 缺省为 ln r"""
    log_r = math.log(r)
    t1 = log_r if t1 is None else t1
    t2 = log_r if t2 is None else t2
    floor = max(7.0 * mu * r * (t1 + log_r), 7.0 * mu_hat ** 2 * r ** 2 * (t2 + log_r) / n)
    return max(1, math.ceil(floor))
