"""
数据生成与 CSV 读写单元测试
"""
import math

import numpy as np
import pytest
from pydantic import ValidationError

from src.common.errors import ParseError
from src.common.models import NoiseMode, SyntheticSpec
from src.datagen import generate, load_csv, load_grid, save_csv
from src.datagen.synthetic import generate_noise
from src.linalg import frobenius_norm


class TestSynthetic:
    """测试 M = QS + E 的生成"""

    def test_noiseless_rank(self):
        """无噪声时 E = 0 且 M = QS"""
        inst = generate(SyntheticSpec(n=40, m=40, degree=4))
        assert inst.m_true.shape == (40, 40)
        assert np.array_equal(inst.e_true, np.zeros((40, 40)))
        assert np.allclose(inst.m_true, inst.qs)
        assert inst.s.matrix.shape == (5, 40)

    def test_seeded(self):
        """同种子可复现，q_seed 改变 Q"""
        spec = SyntheticSpec(n=10, m=12, degree=2, noise_sigma=0.1)
        assert np.array_equal(generate(spec).m_true, generate(spec).m_true)
        other = spec.model_copy(update={"q_seed": 5})
        assert not np.array_equal(generate(spec).q_true, generate(other).q_true)

    def test_noise_seed_independent_of_q(self):
        """noise_seed 只影响 E"""
        spec = SyntheticSpec(n=10, m=12, degree=2, noise_sigma=0.1)
        other = spec.model_copy(update={"noise_seed": 9})
        assert np.array_equal(generate(spec).q_true, generate(other).q_true)
        assert not np.array_equal(generate(spec).e_true, generate(other).e_true)

    def test_dense_noise_scale(self):
        """稠密噪声的 Frobenius 范数约为 σ√(nm)"""
        spec = SyntheticSpec(n=100, m=100, degree=1, noise_sigma=0.1)
        e_f = frobenius_norm(generate_noise(spec))
        # ‖E‖_F/σ 近似服从 χ_{nm}，标准差约 1/√2
        assert abs(e_f - 0.1 * math.sqrt(100 * 100)) <= 3 * 0.1 / math.sqrt(2)

    def test_rank_k_noise(self):
        """rank-k 噪声的秩"""
        spec = SyntheticSpec(n=30, m=20, degree=1, noise_sigma=0.5, noise_mode=NoiseMode.RANK_K, noise_rank=3)
        e = generate_noise(spec)
        assert np.linalg.matrix_rank(e) == 3
        assert spec.k_proxy == 5

    def test_k_proxy(self):
        """k 的代理值随噪声模式变化"""
        assert SyntheticSpec(n=10, m=8, degree=3).k_proxy == 4
        assert SyntheticSpec(n=10, m=8, degree=3, noise_sigma=0.1).k_proxy == 8

    def test_custom_grid(self):
        """自定义网格进入 S 的一次项行"""
        grid = [0.0, 0.5, 1.0]
        inst = generate(SyntheticSpec(n=4, m=3, degree=1, grid=grid))
        assert np.array_equal(inst.s.matrix[1], np.array(grid))

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"n": 4, "m": 3, "degree": 1, "grid": [0.0, 1.0]},
            {"n": 4, "m": 3, "degree": 1, "noise_mode": "rank-k"},
            {"n": 4, "m": 3, "degree": 1, "noise_mode": "rank-k", "noise_rank": 4},
            {"n": 0, "m": 3, "degree": 1},
        ],
        ids=["grid-length", "missing-rank", "rank-too-large", "empty"],
    )
    def test_invalid_specs(self, kwargs):
        """非法参数组合"""
        with pytest.raises(ValidationError):
            SyntheticSpec(**kwargs)


class TestCsv:
    """测试矩阵 CSV 读写"""

    def test_round_trip(self, tmp_path):
        """写出后读回得到相同矩阵"""
        path = tmp_path / "m.csv"
        save_csv(np.array([[1.0, 2.0], [3.0, 4.0]]), path)
        assert np.array_equal(load_csv(path), np.array([[1.0, 2.0], [3.0, 4.0]]))

    def test_round_trip_bit_exact(self, tmp_path):
        """浮点值逐位不变"""
        mtx = np.random.default_rng(3).standard_normal((5, 7)) * 1e-3
        path = tmp_path / "r.csv"
        save_csv(mtx, path, header=False)
        assert np.array_equal(load_csv(path), mtx)

    def test_header_written(self, tmp_path):
        """首行写出形状注释"""
        path = tmp_path / "h.csv"
        save_csv(np.ones((2, 3)), path)
        assert path.read_text().splitlines()[0] == "# 2 3"

    def test_shape_preserved(self, tmp_path):
        """真实数据尺寸 24×52 读写不变"""
        mtx = np.random.default_rng(0).standard_normal((24, 52))
        path = tmp_path / "cf3ch3.csv"
        save_csv(mtx, path)
        assert load_csv(path).shape == (24, 52)

    def test_ragged_row(self, tmp_path):
        """列数不一致时报告行号"""
        path = tmp_path / "bad.csv"
        path.write_text("1,2,3\n4,5\n")
        with pytest.raises(ParseError) as excinfo:
            load_csv(path)
        assert excinfo.value.line == 2
        assert str(excinfo.value).startswith("line 2")

    def test_non_numeric(self, tmp_path):
        """非数值单元格报告行号"""
        path = tmp_path / "bad.csv"
        path.write_text("1,2\n3,x\n")
        with pytest.raises(ParseError) as excinfo:
            load_csv(path)
        assert excinfo.value.line == 2

    def test_header_mismatch(self, tmp_path):
        """形状注释与内容不符"""
        path = tmp_path / "bad.csv"
        path.write_text("# 3 2\n1,2\n3,4\n")
        with pytest.raises(ParseError):
            load_csv(path)

    def test_empty(self, tmp_path):
        """空文件"""
        path = tmp_path / "empty.csv"
        path.write_text("")
        with pytest.raises(ParseError):
            load_csv(path)

    def test_grid_file(self, tmp_path):
        """网格文件跳过注释与空行"""
        path = tmp_path / "grid.txt"
        path.write_text("# coordinates\n0.5\n1.5\n\n2.5\n")
        assert load_grid(path) == (0.5, 1.5, 2.5)

    def test_bad_grid(self, tmp_path):
        """网格文件中的非数值行"""
        path = tmp_path / "grid.txt"
        path.write_text("0.5\nabc\n")
        with pytest.raises(ParseError) as excinfo:
            load_grid(path)
        assert excinfo.value.line == 2
