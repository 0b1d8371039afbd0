"""命令行集成测试

通过 typer CliRunner 调用各实验模式，检查退出码与输出文件。
"""
import csv
import json

import numpy as np
import pytest
from typer.testing import CliRunner

from helpers import linspace_grid, planted
from src.cli.main import app
from src.datagen.csv_io import save_csv

runner = CliRunner()


def _synthetic(**overrides):
    payload = {
        "mode": "solve",
        "data": {"synthetic": {"n": 30, "m": 30, "degree": 3}},
        "qpma": {"target_rank": 4, "degree": 3, "max_iters": 2000},
    }
    payload.update(overrides)
    return payload


def _rows(out_dir):
    with (out_dir / "results.csv").open(encoding="utf-8", newline="") as handle:
        return list(csv.DictReader(handle))


class TestSweepModes:
    """测试各扫描模式"""

    def test_sweep_d_row_count(self, write_config, tmp_path):
        """每个 (方法, d, 试验) 写一行，并输出汇总表"""
        path = write_config(_synthetic(methods=["qpma", "cur1", "cur3"], d_values=[8, 12], trials=2))
        out = tmp_path / "out"
        result = runner.invoke(app, ["sweep-d", "--config", str(path), "--out", str(out)])
        assert result.exit_code == 0, result.output
        rows = _rows(out)
        assert len(rows) == 3 * 2 * 2
        assert {row["method"] for row in rows} == {"qpma", "cur1", "cur3"}
        assert json.loads((out / "summary.json").read_text(encoding="utf-8"))["mode"] == "sweep-d"
        assert "NMSE 汇总" in result.output

    def test_deterministic_rerun(self, write_config, tmp_path):
        """同一配置重跑，results.csv 逐字节相同"""
        path = write_config(_synthetic(
            data={"synthetic": {"n": 30, "m": 30, "degree": 3, "noise_sigma": 0.01}},
            methods=["qpma", "cur2"], d_values=[10, 14], trials=3,
        ))
        first, second = tmp_path / "a", tmp_path / "b"
        for out in (first, second):
            result = runner.invoke(app, ["sweep-d", "-c", str(path), "-o", str(out)])
            assert result.exit_code == 0, result.output
        assert (first / "results.csv").read_bytes() == (second / "results.csv").read_bytes()

    def test_threads_keep_trial_order(self, write_config, tmp_path):
        """多线程时行仍按试验序号排列"""
        path = write_config(_synthetic(methods=["qpma"], d_values=[10], trials=4))
        out = tmp_path / "out"
        result = runner.invoke(app, ["sweep-d", "-c", str(path), "-o", str(out), "--threads", "2"])
        assert result.exit_code == 0, result.output
        assert [row["trial"] for row in _rows(out)] == ["0", "1", "2", "3"]

    def test_sweep_noise(self, write_config, tmp_path):
        """每个 σ 记录噪声能量比"""
        path = write_config(_synthetic(noise_sigmas=[0.0, 0.01], d=10, methods=["qpma", "cur1"]))
        out = tmp_path / "out"
        result = runner.invoke(app, ["sweep-noise", "-c", str(path), "-o", str(out)])
        assert result.exit_code == 0, result.output
        rows = _rows(out)
        assert len(rows) == 4
        noisy = [row for row in rows if float(row["sigma"]) > 0]
        assert all(float(row["noise_ratio"]) > 0 for row in noisy)

    def test_sweep_dr(self, write_config, tmp_path):
        """QPMA 参照一行，随后每个 d_r 一行 CUR+"""
        path = write_config(_synthetic(d_cols=10, d_rows_values=[4, 8]))
        out = tmp_path / "out"
        result = runner.invoke(app, ["sweep-dr", "-c", str(path), "-o", str(out)])
        assert result.exit_code == 0, result.output
        rows = _rows(out)
        assert [row["method"] for row in rows] == ["qpma", "cur+", "cur+"]
        assert [row["d_rows"] for row in rows[1:]] == ["4", "8"]
        assert all(row["error"] == "" for row in rows)

    def test_sweep_dr_one_based_columns(self, write_config, tmp_path):
        """sweep-dr 使用显式 1 起始列集合（含第 m 列）作为固定的 d_c 列"""
        columns = [3, 6, 9, 12, 15, 18, 21, 24, 27, 30]
        path = write_config(_synthetic(columns=columns, d_rows_values=[4, 8]))
        out = tmp_path / "out"
        result = runner.invoke(app, ["sweep-dr", "-c", str(path), "-o", str(out), "--one-based"])
        assert result.exit_code == 0, result.output
        rows = _rows(out)
        assert [row["d"] for row in rows] == ["10", "10", "10"]
        assert all(row["error"] == "" for row in rows)

    def test_sweep_min_d_accepts_one_based(self, write_config, tmp_path):
        """sweep-min-d 与其他模式共用 --one-based 选项"""
        path = write_config(_synthetic(
            data={"synthetic": {"n": 20, "m": 20, "degree": 1, "grid": linspace_grid(20)}},
            qpma={"target_rank": 2, "degree": 1},
            ranks=[2],
        ))
        out = tmp_path / "out"
        result = runner.invoke(app, ["sweep-min-d", "-c", str(path), "-o", str(out), "--one-based", "--threads", "1"])
        assert result.exit_code == 0, result.output
        (row,) = _rows(out)
        assert row["r"] == "2" and row["error"] == ""

    @pytest.mark.slow
    def test_sweep_min_d(self, write_config, tmp_path):
        """最小 d 落在 [r, m] 内且不超过包络"""
        path = write_config(_synthetic(
            data={"synthetic": {"n": 30, "m": 30, "degree": 1, "grid": linspace_grid(30)}},
            qpma={"target_rank": 2, "degree": 1, "max_iters": 5000},
            ranks=[2, 3, 4],
        ))
        out = tmp_path / "out"
        result = runner.invoke(app, ["sweep-min-d", "-c", str(path), "-o", str(out)])
        assert result.exit_code == 0, result.output
        summary = json.loads((out / "summary.json").read_text(encoding="utf-8"))
        for item in summary["min_d"]:
            assert item["r"] <= item["min_d"] <= 30
            assert item["min_d"] <= item["envelope"] + 1e-9
        assert "最小 d" in result.output


class TestSolveAndReport:
    """测试单实例求解与理论报告"""

    def test_real_data_rows_are_points(self, write_config, tmp_path):
        """行为采样点的 CSV 先转置再求解"""
        inst = planted(n=20, m=30, degree=3, grid=linspace_grid(30))
        save_csv(inst.m_true.T, tmp_path / "m.csv")
        (tmp_path / "grid.txt").write_text("\n".join(repr(x) for x in linspace_grid(30)), encoding="utf-8")
        path = write_config({
            "mode": "solve",
            "data": {
                "path": str(tmp_path / "m.csv"),
                "orientation": "rows-are-points",
                "grid_file": str(tmp_path / "grid.txt"),
            },
            "qpma": {"target_rank": 4, "degree": 3},
            "d": 12,
        })
        out = tmp_path / "out"
        result = runner.invoke(app, ["solve", "-c", str(path), "-o", str(out), "--save-models"])
        assert result.exit_code == 0, result.output
        (row,) = _rows(out)
        assert (row["n"], row["m"]) == ("20", "30")
        assert float(row["nmse"]) < 1e-6
        (report,) = json.loads((out / "theory.json").read_text(encoding="utf-8"))
        assert "delta" in report["unavailable"]
        assert (out / "models" / "trial-000" / "qpma-d12" / "meta.json").is_file()

    def test_explicit_one_based_columns(self, write_config, tmp_path):
        """--one-based 下的显式列集合"""
        path = write_config(_synthetic(columns=[1, 5, 9, 13, 17, 21, 25, 29]))
        out = tmp_path / "out"
        result = runner.invoke(app, ["solve", "-c", str(path), "-o", str(out), "--one-based"])
        assert result.exit_code == 0, result.output
        assert _rows(out)[0]["d"] == "8"

    def test_theory_report(self, write_config, tmp_path):
        """带噪声实例写出 theory.json"""
        path = write_config(_synthetic(
            data={"synthetic": {"n": 30, "m": 30, "degree": 3, "noise_sigma": 0.01, "grid": linspace_grid(30)}},
            d=12,
        ))
        out = tmp_path / "out"
        result = runner.invoke(app, ["theory-report", "-c", str(path), "-o", str(out)])
        assert result.exit_code == 0, result.output
        (report,) = json.loads((out / "theory.json").read_text(encoding="utf-8"))
        assert report["bound_new"] > 0
        assert report["e_f"] > 0 and report["delta"] > 0
        assert np.isfinite(report["lambda_min_h"])


    def test_theory_report_threads(self, write_config, tmp_path):
        """theory-report 接受 --threads，多试验时逐试验写出报告"""
        path = write_config(_synthetic(
            data={"synthetic": {"n": 30, "m": 30, "degree": 3, "noise_sigma": 0.01, "grid": linspace_grid(30)}},
            d=12, trials=2,
        ))
        out = tmp_path / "out"
        result = runner.invoke(app, ["theory-report", "-c", str(path), "-o", str(out), "--threads", "2"])
        assert result.exit_code == 0, result.output
        reports = json.loads((out / "theory.json").read_text(encoding="utf-8"))
        assert len(reports) == 2
        assert all(report["bound_revised"] > 0 for report in reports)

class TestGuards:
    """测试退出码与校验命令"""

    def test_non_empty_output_needs_force(self, write_config, tmp_path):
        """非空输出目录需 --force"""
        path = write_config(_synthetic(d=8))
        out = tmp_path / "out"
        out.mkdir()
        (out / "old.csv").write_text("x", encoding="utf-8")
        result = runner.invoke(app, ["solve", "-c", str(path), "-o", str(out)])
        assert result.exit_code == 1
        assert "ArgumentError" in result.output
        result = runner.invoke(app, ["solve", "-c", str(path), "-o", str(out), "--force"])
        assert result.exit_code == 0, result.output

    def test_missing_mode_field(self, write_config, tmp_path):
        """缺少模式字段时退出码为 1"""
        path = write_config(_synthetic())
        result = runner.invoke(app, ["sweep-d", "-c", str(path), "-o", str(tmp_path / "out")])
        assert result.exit_code == 1
        assert "d_values" in result.output

    def test_validate_ok(self, write_config):
        """有效配置输出确认信息"""
        result = runner.invoke(app, ["validate", "-c", str(write_config(_synthetic(d=8)))])
        assert result.exit_code == 0
        assert "配置有效" in result.output

    def test_validate_reports_rank_regime(self, write_config):
        """validate 报告 r > d 但不失败"""
        path = write_config(_synthetic(qpma={"target_rank": 10, "degree": 3}, d=5))
        result = runner.invoke(app, ["validate", "-c", str(path)])
        assert result.exit_code == 0
        assert "target rank exceeds sampled columns" in result.output

    def test_validate_bad_config(self, write_config):
        """无效配置退出码为 1"""
        result = runner.invoke(app, ["validate", "-c", str(write_config({"mode": "solve"}))])
        assert result.exit_code == 1
