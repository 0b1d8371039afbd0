"""TheoryReport 组装

合成数据下 QS 与 E 已知，全部诊断量可算；真实数据只知道 M，
依赖 QS/E 或 V̂_M 对齐项的量记为 None 并列入 unavailable。
"""
import logging
from typing import List, Optional

import numpy as np

from src.common.config import config
from src.common.errors import AssumptionViolation, ColCompleteError, RankError
from src.common.models import BoundVariant, TheoryReport
from src.linalg.matrix import frobenius_norm
from src.linalg.svd import svd_full
from src.metrics.evaluation import spectral_sq_error
from src.polybasis.basis import PolyBasis
from src.qpma.solver import QpmaModel, constraint_residual
from src.theory import bounds, diagnostics

logger = logging.getLogger(__name__)


def build_theory_report(
    m_true: np.ndarray,
    a: np.ndarray,
    basis: PolyBasis,
    model: QpmaModel,
    qs: Optional[np.ndarray] = None,
    e_true: Optional[np.ndarray] = None,
    variant: BoundVariant = BoundVariant.NEW,
    t1: Optional[float] = None,
    t2: Optional[float] = None,
) -> TheoryReport:
    """计算一次 QPMA 求解的全部诊断量"""
    variant = BoundVariant(variant)
    n, m = m_true.shape
    r = model.u_a.shape[1]
    d = model.sampler.d
    idx = list(model.sampler.indices)
    unavailable: List[str] = []
    values = {"n": n, "m": m, "r": r, "d": d, "alpha_floor": diagnostics.alpha_floor(d, m)}

    m_factors = svd_full(m_true)
    sigma_m = m_factors.sigma
    values["sigma_1"] = float(sigma_m[0])
    values["sigma_r_plus_1"] = float(sigma_m[r]) if r < sigma_m.size else 0.0
    values["measured_sq_spectral_err"] = spectral_sq_error(model.m_hat, m_true)

    try:
        values["mu"] = diagnostics.incoherence(m_true, r)
    except RankError:
        unavailable.append("mu")
    try:
        values["mu_hat"] = diagnostics.incoherence(model.m_hat, r)
    except RankError:
        unavailable.append("mu_hat")
    if "mu" in values and "mu_hat" in values:
        values["sample_floor"] = bounds.sample_floor(values["mu"], values["mu_hat"], r, n, t1, t2)

    values["column_projection_err"] = diagnostics.column_projection_error(m_true, model.u_a)
    values["projection_err"] = diagnostics.projection_error(m_true, model.u_a, model.v_qs)
    values["estimation_err"] = diagnostics.estimation_error(m_true, model.u_a, model.v_qs, model.z_hat)

    if r <= config.HESSIAN_MAX_RANK:
        h = diagnostics.hessian_of_f(model.u_a, model.v_qs[idx])
        values["lambda_min_h"] = float(np.linalg.eigvalsh(h)[0])
    else:
        unavailable.append("lambda_min_h")

    if qs is None or e_true is None:
        unavailable += [
            "delta", "r_resid_f", "s_resid_f", "e_f", "sin_theta_f", "wedin_lhs", "wedin_rhs", "alignment_f",
            "delta_1", "delta_2", "delta_s", "d_f", "d_f_bound", "snr", "constraint_residual",
            "projection_bound", "estimation_bound", "bound_old", "bound_new", "bound_revised",
        ]
        return TheoryReport(**values, unavailable=unavailable)

    e_f = frobenius_norm(e_true)
    s_psi = basis.columns(idx)
    values["e_f"] = e_f
    values["constraint_residual"] = constraint_residual(a, model.q_hat, s_psi, e_f, d)

    r_resid, s_resid = diagnostics.wedin_residuals(qs, m_true, r)
    values["r_resid_f"] = frobenius_norm(r_resid)
    values["s_resid_f"] = frobenius_norm(s_resid)

    v_m = m_factors.vt[:r].T
    u_m = m_factors.u[:, :r]
    values["sin_theta_f"] = diagnostics.sin_theta_norm(v_m, model.v_qs)
    values["alignment_f"] = frobenius_norm(v_m.T @ model.v_qs - np.eye(r))

    qs_factors = svd_full(qs)
    values["wedin_lhs"] = float(np.sqrt(
        diagnostics.sin_theta_norm(qs_factors.vt[:r].T, v_m) ** 2
        + diagnostics.sin_theta_norm(qs_factors.u[:, :r], u_m) ** 2
    ))

    # QS = Q·S 且 S 行满秩，Q 可由最小二乘精确还原
    q_true = np.linalg.lstsq(basis.matrix.T, qs.T, rcond=None)[0].T
    p = basis.matrix.shape[0]
    values["delta_1"] = diagnostics.effective_gap(qs_factors.sigma, sigma_m, r)
    values["delta_2"] = diagnostics.side_information_gap(qs_factors.sigma, p)
    values["delta_s"] = values["delta_2"] / diagnostics.sampling_spread(basis.matrix, s_psi)
    values["d_f"] = frobenius_norm(model.q_hat - q_true)
    values["d_f_bound"] = diagnostics.coefficient_error_bound(e_f, s_psi)
    if e_f > 0.0 and values["d_f"] > 0.0:
        values["snr"] = values["delta_1"] / e_f + values["delta_2"] / values["d_f"]

    delta = None
    try:
        delta = diagnostics.delta_gap(sigma_m[:r], qs_factors.sigma[r:])
    except AssumptionViolation as err:
        logger.warning(f"δ 间隙假设不成立: {err}")
        unavailable += ["delta", "wedin_rhs"]
    else:
        values["delta"] = delta
        values["wedin_rhs"] = float(np.hypot(values["r_resid_f"], values["s_resid_f"]) / delta)

    inputs = bounds.BoundInputs(
        sigma_1=values["sigma_1"],
        sigma_r_plus_1=values["sigma_r_plus_1"],
        m=m,
        n=n,
        d=d,
        delta=delta,
        r_resid_f=values["r_resid_f"],
        s_resid_f=values["s_resid_f"],
        e_f=e_f,
        alignment_f=values["alignment_f"],
        delta_1=values["delta_1"],
        delta_2=values["delta_2"],
        delta_s=values["delta_s"],
        d_f=values["d_f"],
    )
    for option in BoundVariant:
        try:
            breakdown = bounds.theorem1_bound(inputs, option)
        except AssumptionViolation as err:
            logger.warning(f"{option.value} 误差界不可用: {err}")
            unavailable.append(f"bound_{option.value}")
            continue
        values[f"bound_{option.value}"] = breakdown.total
        values[f"breakdown_{option.value}"] = breakdown

    selected = values.get(f"breakdown_{variant.value}")
    if selected is None:
        unavailable += ["projection_bound", "estimation_bound"]
        return TheoryReport(**values, unavailable=unavailable)

    values["projection_bound"] = bounds.projection_bound(inputs, variant).total
    values["estimation_bound"] = bounds.estimation_bound(inputs, variant).total
    values["bound_holds"] = values["measured_sq_spectral_err"] <= selected.total
    if not values["bound_holds"]:
        logger.warning(
            f"误差界被违反 ({variant.value}): 实测 {values['measured_sq_spectral_err']:.4e} > 界 {selected.total:.4e}"
        )
    return TheoryReport(**values, unavailable=unavailable)


def safe_theory_report(*args, **kwargs) -> Optional[TheoryReport]:
    """在批量实验中使用：诊断失败只记日志"""
    try:
        return build_theory_report(*args, **kwargs)
    except ColCompleteError as err:
        logger.warning(f"理论诊断失败: {type(err).__name__}: {err}")
        return None
