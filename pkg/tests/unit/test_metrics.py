"""
评估指标单元测试
"""
import math

import numpy as np
import pytest

from src.common.errors import DegenerateMetricError, ShapeError
from src.metrics import evaluate, nmse, numerical_rank, spectral_sq_error


class TestNmse:
    """测试 NMSE"""

    def test_exact(self):
        """估计等于真值时为 0"""
        m = np.random.default_rng(1).standard_normal((4, 5))
        assert nmse(m, m) == 0.0

    def test_zero_estimate(self):
        """零估计的 NMSE 为 1"""
        m = np.random.default_rng(1).standard_normal((4, 5))
        assert math.isclose(nmse(np.zeros_like(m), m), 1.0)

    def test_norm_ratio(self):
        """缩放估计的 NMSE"""
        m = np.eye(2)
        assert math.isclose(nmse(0.5 * m, m), 0.5)

    def test_zero_truth(self):
        """真值为零矩阵时报错，兼容 ZeroDivisionError"""
        with pytest.raises(DegenerateMetricError):
            nmse(np.ones((2, 2)), np.zeros((2, 2)))
        with pytest.raises(ZeroDivisionError):
            nmse(np.ones((2, 2)), np.zeros((2, 2)))

    def test_shape_mismatch(self):
        """形状不一致"""
        with pytest.raises(ShapeError):
            nmse(np.ones((2, 3)), np.ones((3, 2)))


class TestSpectralError:
    """测试谱范数平方误差"""

    def test_equal(self):
        """相等时为零"""
        m = np.ones((3, 3))
        assert spectral_sq_error(m, m) == 0.0

    def test_diagonal(self):
        """差为对角阵时等于最大对角元的平方"""
        assert math.isclose(spectral_sq_error(np.zeros((2, 2)), np.diag([2.0, 1.0])), 4.0)

    def test_matches_svd(self):
        """等于差矩阵最大奇异值的平方"""
        rng = np.random.default_rng(4)
        a, b = rng.standard_normal((5, 6)), rng.standard_normal((5, 6))
        expected = np.linalg.svd(a - b, compute_uv=False)[0] ** 2
        assert math.isclose(spectral_sq_error(a, b), expected, rel_tol=1e-10)


class TestEvaluate:
    """测试评估汇总"""

    def test_fields(self):
        """精确估计的各项指标均为零"""
        rng = np.random.default_rng(2)
        truth = rng.standard_normal((6, 2)) @ rng.standard_normal((2, 5))
        result = evaluate(truth, truth)
        assert result.nmse == 0.0
        assert result.sq_frobenius_err == 0.0
        assert result.rank_of_estimate == 2
        assert numerical_rank(np.zeros((3, 3))) == 0
