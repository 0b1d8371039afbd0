"""
QPMA 求解器单元测试

测试范围：
- 闭式定步长下降（收敛、发散检测、轨迹、与逐步迭代一致）
- 三个阶段的目标函数、梯度与闭式解对照
- 端到端 solve 的前置条件与阶段错误包装
"""
import math

import numpy as np
import pytest

from helpers import central_difference, linspace_grid, orthonormal, planted
from src.common.errors import DivergenceError, OrthonormalityError, RankError, ShapeError, StageError
from src.common.models import ColumnSpaceMethod, QpmaConfig
from src.common.rng import stream
from src.linalg import frobenius_norm, projector
from src.metrics import nmse
from src.polybasis import build_basis
from src.qpma import (
    constraint_residual,
    estimate_column_space,
    estimate_row_space,
    fit_q,
    fit_z,
    gradient_descent,
    q_closed_form,
    q_gradient,
    q_objective,
    solve,
    z_gradient,
    z_objective,
)
from src.qpma.solver import _stage
from src.sampling import build_sampler, sample_columns, sample_uniform


def _quadratic(center, x0, step, max_iters, grad_tol):
    """f(X) = ‖X − C‖_F²，Gram 为单位阵"""
    k = center.shape[1]
    diff = x0 - center
    return gradient_descent(x0, np.eye(k), float(np.sum(diff ** 2)), 2.0 * diff, step, max_iters, grad_tol)


def _stepwise(x0, gradient, objective, step, iters):
    """逐步执行 X ← X − η∇f(X)，返回各步迭代点与目标值"""
    xs, fs = [x0], [objective(x0)]
    for _ in range(iters):
        xs.append(xs[-1] - step * gradient(xs[-1]))
        fs.append(objective(xs[-1]))
    return xs, fs


class TestGradientDescent:
    """测试闭式定步长下降"""

    def test_converges(self):
        """定步长收敛到最小点，迭代次数与轨迹长度一致"""
        center = np.array([[1.0, -2.0], [0.5, 3.0]])
        result = _quadratic(center, np.zeros((2, 2)), 0.25, 100, 1e-12)
        assert result.converged
        assert np.allclose(result.x, center)
        assert result.iterations == len(result.trace) - 1
        assert result.final_objective == result.trace[-1]

    def test_iteration_cap(self):
        """达到 max_iters 时未收敛，轨迹不上升"""
        center = np.ones((3, 1))
        result = _quadratic(center, np.zeros((3, 1)), 0.01, 5, 0.0)
        assert not result.converged
        assert result.iterations == 5
        assert len(result.trace) == 6
        assert np.all(np.diff(result.trace) <= 0.0)

    def test_divergence(self):
        """步长过大时第一步目标值上升"""
        with pytest.raises(DivergenceError) as excinfo:
            _quadratic(np.ones((2, 1)), np.zeros((2, 1)), 2.0, 10, 0.0)
        assert excinfo.value.iteration == 1
        assert excinfo.value.current > excinfo.value.previous

    def test_zero_gradient_start(self):
        """起点梯度为零时不迭代"""
        result = _quadratic(np.zeros((2, 2)), np.zeros((2, 2)), 0.1, 10, 1e-12)
        assert result.converged
        assert result.iterations == 0
        assert result.trace.tolist() == [0.0]

    def test_matches_stepwise_iterates(self):
        """闭式迭代点与目标值和逐步沿 q_gradient 下降一致"""
        rng = np.random.default_rng(21)
        a = rng.standard_normal((6, 9))
        s_psi = rng.standard_normal((3, 9))
        q0 = rng.standard_normal((6, 3))
        step = 0.5 / np.linalg.norm(s_psi, 2) ** 2
        xs, fs = _stepwise(
            q0,
            lambda q: q_gradient(q, a, s_psi),
            lambda q: q_objective(q, a, s_psi),
            step,
            40,
        )
        result = gradient_descent(
            q0, s_psi @ s_psi.T, fs[0], q_gradient(q0, a, s_psi), step, 40, 0.0
        )
        assert result.iterations == 40
        assert np.allclose(result.trace, fs, rtol=1e-10, atol=1e-12 * fs[0])
        assert frobenius_norm(result.x - xs[-1]) < 1e-10 * frobenius_norm(xs[-1])

    def test_stops_where_stepwise_would(self):
        """第一个梯度范数不超过阈值的迭代即停止"""
        center = np.array([[2.0, -1.0]])
        step = 0.1
        xs, _ = _stepwise(np.zeros((1, 2)), lambda x: 2.0 * (x - center), lambda x: 0.0, step, 200)
        tol = 1e-6
        expected = next(t for t, x in enumerate(xs) if np.linalg.norm(2.0 * (x - center)) <= tol)
        result = _quadratic(center, np.zeros((1, 2)), step, 200, tol)
        assert result.converged
        assert result.iterations == expected

    def test_ill_conditioned_long_run(self):
        """条件数 1e5 的 Gram 需要上百万步，闭式求值照样完成"""
        gram = np.diag([1.0, 1e-5])
        target = np.array([[1.0, 1.0]])
        x0 = np.zeros((1, 2))
        f0 = float(target @ gram @ target.T)
        grad0 = -2.0 * target @ gram
        result = gradient_descent(x0, gram, f0, grad0, 0.5, 5_000_000, 1e-12)
        assert result.converged
        assert np.allclose(result.x, target, atol=1e-5)
        assert len(result.trace) == result.iterations + 1
        assert np.all(np.diff(result.trace) <= 1e-12 * f0)


class TestQStage:
    """测试多项式系数阶段"""

    def test_objective_at_zero(self):
        """Q = 0 时目标值为 ‖A‖_F²"""
        rng = np.random.default_rng(1)
        a = rng.standard_normal((6, 4))
        s_psi = rng.standard_normal((3, 4))
        assert math.isclose(q_objective(np.zeros((6, 3)), a, s_psi), frobenius_norm(a) ** 2)

    def test_objective_perturbation(self, noiseless_instance):
        """无噪声时 f(Q + Δ) = ‖ΔSΨ‖_F²"""
        inst = noiseless_instance
        sampler = sample_uniform(inst.spec.m, 8, seed=2)
        s_psi = inst.s.columns(sampler.indices)
        a = sample_columns(inst.m_true, sampler)
        delta = np.random.default_rng(4).standard_normal(inst.q_true.shape)
        delta /= frobenius_norm(delta)
        expected = frobenius_norm(delta @ s_psi) ** 2
        assert math.isclose(q_objective(inst.q_true + delta, a, s_psi), expected, rel_tol=1e-6)

    def test_gradient_finite_difference(self):
        """解析梯度与中心差分一致"""
        rng = np.random.default_rng(3)
        worst = 0.0
        for _ in range(20):
            a = rng.standard_normal((5, 6))
            s_psi = rng.standard_normal((3, 6))
            q = rng.standard_normal((5, 3))
            numeric = central_difference(lambda x: q_objective(x, a, s_psi), q)
            analytic = q_gradient(q, a, s_psi)
            worst = max(worst, frobenius_norm(numeric - analytic) / frobenius_norm(analytic))
        assert worst < 1e-5

    def test_shape_check(self):
        """Q、A、SΨ 形状不匹配"""
        with pytest.raises(ShapeError):
            q_objective(np.zeros((2, 2)), np.zeros((3, 4)), np.zeros((2, 4)))

    def test_fit_matches_normal_equations(self):
        """收敛到正规方程的解"""
        inst = planted(n=20, m=30, degree=2, grid=linspace_grid(30))
        sampler = sample_uniform(30, 10, seed=5)
        a = sample_columns(inst.m_true, sampler)
        s_psi = inst.s.columns(sampler.indices)
        cfg = QpmaConfig(target_rank=3, degree=2)
        q_hat, trace = fit_q(a, s_psi, cfg)
        assert q_objective(q_hat, a, s_psi) < 1e-16 * frobenius_norm(a) ** 2
        assert frobenius_norm(q_hat - q_closed_form(a, s_psi)) < 1e-6 * frobenius_norm(inst.q_true)
        assert trace[-1] <= trace[0]

    def test_trace_follows_q_objective(self):
        """fit_q 的轨迹与终点等于从 Q̂₁ 沿 q_gradient 逐步下降的结果"""
        rng = np.random.default_rng(17)
        a = rng.standard_normal((7, 9))
        s_psi = rng.standard_normal((3, 9))
        cfg = QpmaConfig(target_rank=2, degree=2, max_iters=30, grad_tol=0.0, seed=4)
        q_hat, trace = fit_q(a, s_psi, cfg)
        q0 = stream(4, "q-init").standard_normal((7, 3))
        xs, fs = _stepwise(
            q0,
            lambda q: q_gradient(q, a, s_psi),
            lambda q: q_objective(q, a, s_psi),
            1.0 / (2.0 * np.linalg.norm(s_psi, 2) ** 2),
            30,
        )
        assert np.allclose(trace, fs, rtol=1e-10)
        assert frobenius_norm(q_hat - xs[-1]) < 1e-10 * frobenius_norm(xs[-1])

    def test_deterministic_init(self):
        """同种子的随机初值相同"""
        inst = planted(n=10, m=20, degree=2, grid=linspace_grid(20))
        sampler = sample_uniform(20, 6, seed=1)
        a = sample_columns(inst.m_true, sampler)
        s_psi = inst.s.columns(sampler.indices)
        cfg = QpmaConfig(target_rank=2, degree=2, max_iters=10, seed=7)
        first, _ = fit_q(a, s_psi, cfg)
        second, _ = fit_q(a, s_psi, cfg)
        assert np.array_equal(first, second)

    def test_constraint_residual_noiseless(self, noiseless_instance):
        """真系数在无噪声时满足约束"""
        inst = noiseless_instance
        sampler = sample_uniform(inst.spec.m, 8, seed=2)
        a = sample_columns(inst.m_true, sampler)
        value = constraint_residual(a, inst.q_true, inst.s.columns(sampler.indices), 0.0, sampler.d)
        assert value <= 1e-18 * frobenius_norm(a) ** 2


class TestRowSpace:
    """测试行空间估计"""

    def test_true_coefficients_recover_row_space(self):
        """真系数给出 QS 的行空间"""
        inst = planted(n=30, m=25, degree=3, grid=linspace_grid(25))
        v = estimate_row_space(inst.q_true, inst.s, 4)
        assert v.shape == (25, 4)
        reference = np.linalg.svd(inst.qs)[2][:4].T
        assert frobenius_norm(projector(v) - projector(reference)) < 1e-8

    def test_rank_one(self):
        """常数基的行空间是归一化全一向量"""
        basis = build_basis(linspace_grid(6), 0)
        v = estimate_row_space(np.ones((4, 1)), basis, 1)
        assert np.allclose(np.abs(v[:, 0]), 1.0 / math.sqrt(6))

    def test_rank_deficient(self):
        """Q̂S 秩不足 r 时报错"""
        basis = build_basis(linspace_grid(6), 2)
        with pytest.raises(RankError):
            estimate_row_space(np.zeros((4, 3)), basis, 2)


class TestZStage:
    """测试核心矩阵阶段"""

    def test_gradient_finite_difference(self):
        """解析梯度与中心差分一致"""
        rng = np.random.default_rng(8)
        worst = 0.0
        for seed in range(20):
            u_a = orthonormal(7, 3, seed)
            w = rng.standard_normal((3, 5))
            a = rng.standard_normal((7, 5))
            z = rng.standard_normal((3, 3))
            numeric = central_difference(lambda x: z_objective(x, a, u_a, w), z)
            analytic = z_gradient(z, a, u_a, w)
            worst = max(worst, frobenius_norm(numeric - analytic) / frobenius_norm(analytic))
        assert worst < 1e-5

    def test_fit_matches_pseudo_inverse(self):
        """收敛到 U_AᵀAW†"""
        rng = np.random.default_rng(12)
        u_a = orthonormal(20, 3, seed=12)
        w = rng.standard_normal((3, 8))
        a = rng.standard_normal((20, 8))
        z_hat, trace = fit_z(a, u_a, w, QpmaConfig(target_rank=3, degree=2))
        z_star = u_a.T @ a @ np.linalg.pinv(w)
        assert frobenius_norm(z_hat - z_star) < 1e-8
        assert math.isclose(trace[-1], z_objective(z_hat, a, u_a, w), rel_tol=1e-9)

    def test_starts_from_zero(self):
        """从 Z = 0 出发，首个目标值为 ‖A‖_F²"""
        rng = np.random.default_rng(2)
        u_a = orthonormal(6, 2, seed=2)
        w = rng.standard_normal((2, 4))
        a = rng.standard_normal((6, 4))
        _, trace = fit_z(a, u_a, w, QpmaConfig(target_rank=2, degree=1, max_iters=3))
        assert math.isclose(trace[0], frobenius_norm(a) ** 2, rel_tol=1e-12)

    def test_trace_follows_z_objective(self):
        """轨迹逐项等于沿 z_gradient 逐步下降时的 f(Z)"""
        rng = np.random.default_rng(31)
        u_a = orthonormal(10, 3, seed=31)
        w = rng.standard_normal((3, 6))
        a = rng.standard_normal((10, 6))
        cfg = QpmaConfig(target_rank=3, degree=2, max_iters=25, grad_tol=0.0)
        z_hat, trace = fit_z(a, u_a, w, cfg)
        step = 1.0 / (2.0 * np.linalg.norm(w, 2) ** 2)
        z = np.zeros((3, 3))
        expected = [z_objective(z, a, u_a, w)]
        for _ in range(25):
            z = z - step * z_gradient(z, a, u_a, w)
            expected.append(z_objective(z, a, u_a, w))
        assert len(trace) == 26
        assert np.allclose(trace, expected, rtol=1e-10)
        assert frobenius_norm(z_hat - z) < 1e-10 * frobenius_norm(z)

    def test_rejects_non_orthonormal_basis(self):
        """U_A 列不正交时拒绝求解"""
        rng = np.random.default_rng(5)
        with pytest.raises(OrthonormalityError):
            fit_z(rng.standard_normal((6, 4)), 2.0 * orthonormal(6, 2, seed=5), rng.standard_normal((2, 4)),
                  QpmaConfig(target_rank=2, degree=1))

    def test_monotone_traces(self):
        """fit_q 与 fit_z 的目标值轨迹不上升"""
        for seed in range(50):
            inst = planted(n=15, m=20, degree=3, sigma=0.01, q_seed=seed, noise_seed=seed + 100)
            sampler = sample_uniform(20, 8, seed=seed)
            a = sample_columns(inst.m_true, sampler)
            cfg = QpmaConfig(target_rank=3, degree=3, max_iters=200, seed=seed)
            q_hat, trace_q = fit_q(a, inst.s.columns(sampler.indices), cfg)
            u_a = estimate_column_space(a, 3)
            v_qs = estimate_row_space(q_hat, inst.s, 3)
            _, trace_z = fit_z(a, u_a, v_qs[list(sampler.indices)].T, cfg)
            for trace in (trace_q, trace_z):
                slack = 1e-12 * max(1.0, abs(trace[0]))
                assert all(b <= a_ + slack for a_, b in zip(trace, trace[1:]))


class TestColumnSpace:
    """测试列空间估计"""

    def test_eig_route_spans_same_subspace(self):
        """特征分解路线与 SVD 路线张成同一子空间"""
        rng = np.random.default_rng(9)
        a = rng.standard_normal((8, 3)) @ rng.standard_normal((3, 6)) + 1e-3 * rng.standard_normal((8, 6))
        u_svd = estimate_column_space(a, 3, ColumnSpaceMethod.SVD)
        u_eig = estimate_column_space(a, 3, ColumnSpaceMethod.EIG)
        assert frobenius_norm(projector(u_svd) - projector(u_eig)) < 1e-8

    def test_residual_matches_spectrum(self):
        """‖(I − P)AAᵀ‖₂ = σ²_{r+1}(A)"""
        a = np.random.default_rng(9).standard_normal((8, 4))
        u_a = estimate_column_space(a, 2)
        residual = np.linalg.norm((np.eye(8) - u_a @ u_a.T) @ a @ a.T, 2)
        assert math.isclose(residual, np.linalg.svd(a, compute_uv=False)[2] ** 2, rel_tol=1e-8)

    def test_rank_out_of_range(self):
        """r 超过列数"""
        with pytest.raises(RankError):
            estimate_column_space(np.ones((3, 2)), 3, ColumnSpaceMethod.EIG)


class TestSolve:
    """测试端到端求解"""

    def test_noiseless_recovery(self):
        """无噪声时精确重建，输出形状与迭代计数一致"""
        inst = planted(n=30, m=40, degree=3, grid=linspace_grid(40))
        sampler = sample_uniform(40, 12, seed=2)
        cfg = QpmaConfig(target_rank=4, degree=3)
        model = solve(sample_columns(inst.m_true, sampler), sampler, inst.s, cfg)
        assert model.m_hat.shape == (30, 40)
        assert model.u_a.shape == (30, 4)
        assert model.v_qs.shape == (40, 4)
        assert model.z_hat.shape == (4, 4)
        assert model.iters_q == len(model.trace_q) - 1
        assert model.iters_z == len(model.trace_z) - 1
        assert nmse(model.m_hat, inst.m_true) < 1e-6

    def test_rank_above_sampled_columns(self, noiseless_instance):
        """r 大于 d 时拒绝"""
        inst = noiseless_instance
        sampler = build_sampler(inst.spec.m, [0, 5, 9, 20])
        with pytest.raises(RankError):
            solve(sample_columns(inst.m_true, sampler), sampler, inst.s, QpmaConfig(target_rank=5, degree=4))

    def test_degree_mismatch(self, noiseless_instance):
        """配置次数与基矩阵不符"""
        inst = noiseless_instance
        sampler = sample_uniform(inst.spec.m, 8, seed=0)
        with pytest.raises(ShapeError):
            solve(sample_columns(inst.m_true, sampler), sampler, inst.s, QpmaConfig(target_rank=3, degree=2))

    def test_stage_error_wraps_divergence(self, noiseless_instance):
        """梯度发散被包装为阶段错误"""
        inst = noiseless_instance
        sampler = sample_uniform(inst.spec.m, 8, seed=0)
        cfg = QpmaConfig(target_rank=5, degree=4, step_size=10.0)
        with pytest.raises(StageError) as excinfo:
            solve(sample_columns(inst.m_true, sampler), sampler, inst.s, cfg)
        assert excinfo.value.stage == "fit-q"
        assert isinstance(excinfo.value.cause, DivergenceError)
        assert str(excinfo.value).startswith("[fit-q] DivergenceError")

    def test_stage_context(self):
        """_stage 只包装库异常一次，其他异常原样抛出"""
        with pytest.raises(StageError) as excinfo:
            with _stage("fit-z"):
                raise DivergenceError(3, 1.0, 2.0)
        assert excinfo.value.stage == "fit-z"
        with pytest.raises(StageError) as nested:
            with _stage("outer"):
                with _stage("inner"):
                    raise ShapeError("bad")
        assert nested.value.stage == "inner"
        with pytest.raises(KeyError):
            with _stage("fit-q"):
                raise KeyError("x")
