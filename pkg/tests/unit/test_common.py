"""
公共层单元测试

测试范围：
- pydantic 模型校验（SyntheticSpec / DataSpec / CurPlusSpec / TrialRecord）
- 异常层次与消息格式
- 随机数流的确定性
- 日志初始化幂等
"""
import logging

import numpy as np
import pytest
from pydantic import ValidationError

from src.common.errors import (
    ColCompleteError,
    ConfigError,
    DivergenceError,
    SamplingIndexError,
    StageError,
)
from src.common.logging import setup_logging
from src.common.models import (
    DataSpec,
    ExperimentMode,
    Method,
    NoiseMode,
    SyntheticSpec,
    TrialRecord,
)
from src.common.rng import stream


class TestModels:
    """测试配置模型校验"""

    def test_grid_length_must_match(self):
        """网格长度必须等于列数 m"""
        with pytest.raises(ValidationError):
            SyntheticSpec(n=3, m=4, degree=1, grid=[1.0, 2.0])

    def test_rank_k_needs_rank(self):
        """rank-k 噪声必须给出 noise_rank"""
        with pytest.raises(ValidationError):
            SyntheticSpec(n=5, m=5, degree=1, noise_sigma=0.1, noise_mode=NoiseMode.RANK_K)

    def test_k_proxy(self):
        """k 的代理值：无噪声 l+1，稠密噪声 min(n, m)，rank-k 为 l+1+k"""
        assert SyntheticSpec(n=10, m=20, degree=3).k_proxy == 4
        assert SyntheticSpec(n=10, m=20, degree=3, noise_sigma=0.1).k_proxy == 10
        spec = SyntheticSpec(n=10, m=20, degree=3, noise_sigma=0.1, noise_mode="rank-k", noise_rank=2)
        assert spec.k_proxy == 6

    def test_data_spec_one_source(self):
        """数据来源必须恰好给出一个"""
        with pytest.raises(ValidationError):
            DataSpec()
        with pytest.raises(ValidationError):
            DataSpec(synthetic=SyntheticSpec(n=2, m=2, degree=0), path="m.csv")

    def test_extra_fields_rejected(self):
        """未知字段直接拒绝"""
        with pytest.raises(ValidationError):
            SyntheticSpec(n=2, m=2, degree=0, colour="red")

    def test_method_variant(self):
        """方法名到 CUR+ 类型编号的映射"""
        assert Method.QPMA.cur_variant is None
        assert Method("cur2").cur_variant == 2

    def test_trial_record_ok(self):
        """只有带 NMSE 且无错误的记录算成功"""
        base = dict(mode=ExperimentMode.SOLVE, method="qpma", trial=0, seed=0, n=4, m=4, r=1, l=0)
        assert TrialRecord(**base, nmse=0.1).ok
        assert not TrialRecord(**base).ok
        assert not TrialRecord(**base, nmse=0.1, error="RankError: x").ok


class TestErrors:
    """测试异常层次"""

    def test_builtin_compatibility(self):
        """采样下标错误同时是 IndexError"""
        err = SamplingIndexError("bad index")
        assert isinstance(err, IndexError)
        assert isinstance(err, ColCompleteError)

    def test_stage_error_message(self):
        """阶段错误保留原因并以阶段名开头"""
        cause = DivergenceError(3, 1.0, 2.0)
        err = StageError("fit-z", cause)
        assert err.cause is cause
        assert str(err).startswith("[fit-z] DivergenceError: objective increased at iteration 3")

    def test_config_error_from_validation(self):
        """校验错误定位到具体字段"""
        with pytest.raises(ValidationError) as excinfo:
            SyntheticSpec(n=0, m=2, degree=0)
        err = ConfigError.from_validation("cfg.json", excinfo.value.errors())
        assert err.field == "n"
        assert str(err).startswith("cfg.json.n: ")

    def test_config_error_plain(self):
        """无字段信息时原样输出"""
        assert str(ConfigError("oops")) == "oops"


class TestRng:
    """测试随机数流"""

    def test_deterministic(self):
        """同种子同标签得到同一序列"""
        assert np.array_equal(stream(5, "q").standard_normal(4), stream(5, "q").standard_normal(4))

    def test_tags_independent(self):
        """不同标签的流互不相同"""
        assert not np.array_equal(stream(5, "q").standard_normal(4), stream(5, "noise").standard_normal(4))

    def test_negative_seed(self):
        """负种子报错"""
        with pytest.raises(ValueError):
            stream(-1, "q")


class TestLogging:
    """测试日志初始化"""

    def test_idempotent(self, tmp_path):
        """重复初始化不叠加 handler"""
        name = "src.test-logging"
        first = setup_logging(name)
        count = len(first.handlers)
        second = setup_logging(name)
        assert first is second
        assert len(second.handlers) == count

        setup_logging(name, log_file=str(tmp_path / "run.log"))
        assert sum(isinstance(h, logging.FileHandler) for h in second.handlers) == 1
        for handler in list(second.handlers):
            handler.close()
            second.removeHandler(handler)
