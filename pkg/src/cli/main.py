"""colcomplete 命令行入口

    colcomplete <mode> --config <file> [--out <dir>] [--force] [--one-based] [--threads N]

每个命令行参数都对应配置文件中的同名键，命令行优先。
"""
from pathlib import Path
from typing import Optional

import typer
from rich.console import Console
from rich.table import Table

from src.common.config import config
from src.common.errors import ColCompleteError
from src.common.logging import setup_logging
from src.common.models import ExperimentMode
from src.cli.runner import RunResult, load_experiment_config, run_experiment, validate_config

app = typer.Typer(help="colcomplete: 列采样 + 多项式侧信息的低秩矩阵重建实验工具")
console = Console()

ConfigOption = typer.Option(..., "--config", "-c", exists=True, dir_okay=False, help="实验配置 JSON 文件")
OutOption = typer.Option(None, "--out", "-o", help="输出目录（覆盖 output_dir）")
ForceOption = typer.Option(False, "--force", help="允许写入非空输出目录")
OneBasedOption = typer.Option(False, "--one-based", help="columns 按 1 起始解释")
ThreadsOption = typer.Option(None, "--threads", min=1, help="并行试验线程数")
SaveModelsOption = typer.Option(False, "--save-models", help="保存每个试验的模型目录")
LogFileOption = typer.Option(None, "--log-file", help="日志同时写入该文件")
NormalizeOption = typer.Option(False, "--normalize-basis", help="S 的每行归一化为单位范数")
HybridOption = typer.Option(False, "--hybrid-rows", help="CUR+ 用 Q̂S 的行估计行空间")


@app.callback()
def callback():
    """
    colcomplete experiment CLI
    """
    pass


def _print_summary(result: RunResult) -> None:
    table = Table(title=f"NMSE 汇总 ({result.summary['mode']}, {len(result.records)} 行)")
    table.add_column("方法", style="cyan", no_wrap=True)
    table.add_column("r", justify="right")
    table.add_column("d", justify="right")
    table.add_column("d_r", justify="right")
    table.add_column("σ", justify="right")
    table.add_column("试验数", justify="right")
    table.add_column("失败", style="red", justify="right")
    table.add_column("平均 NMSE", style="green", justify="right")
    table.add_column("标准差", style="yellow", justify="right")

    def fmt(value, spec=".3e"):
        return "-" if value is None else format(value, spec)

    for row in result.summary["groups"]:
        table.add_row(
            row["method"],
            str(row["r"]),
            fmt(row["d"], "d"),
            fmt(row["d_rows"], "d"),
            fmt(row["sigma"], "g"),
            str(row["trials"]),
            str(row["failures"]),
            fmt(row["mean_nmse"]),
            fmt(row["std_nmse"]),
        )
    console.print(table)

    for item in result.summary.get("min_d", []):
        console.print(
            f"r={item['r']}: 最小 d = {item['min_d']}  (c·r·ln(r+1) = {item['envelope']:.2f}, c = {item['fitted_c']:.3f})",
            style="dim",
        )
    console.print(f"\n💾 结果已写入 {result.out_dir}\n", style="dim")


def _run(
    mode: ExperimentMode,
    config_file: Path,
    out: Optional[Path],
    force: bool,
    one_based: bool,
    threads: Optional[int],
    save_models: bool,
    log_file: Optional[Path],
    normalize_basis: bool,
    hybrid_rows: bool,
) -> None:
    setup_logging(log_file=str(log_file) if log_file else None)
    overrides = {
        "output_dir": str(out) if out else None,
        "force": force or None,
        "one_based": one_based or None,
        "threads": threads,
        "save_models": save_models or None,
        "normalize_basis": normalize_basis or None,
        "hybrid_rows": hybrid_rows or None,
    }
    try:
        cfg = load_experiment_config(config_file, mode=mode, overrides=overrides)
        result = run_experiment(cfg)
    except (ColCompleteError, OSError) as e:
        console.print(f"❌ {type(e).__name__}: {e}", style="red", markup=False)
        raise typer.Exit(code=1)
    _print_summary(result)


@app.command("solve")
def solve_cmd(
    config_file: Path = ConfigOption,
    out: Optional[Path] = OutOption,
    force: bool = ForceOption,
    one_based: bool = OneBasedOption,
    threads: Optional[int] = ThreadsOption,
    save_models: bool = SaveModelsOption,
    log_file: Optional[Path] = LogFileOption,
    normalize_basis: bool = NormalizeOption,
    hybrid_rows: bool = HybridOption,
):
    """单实例求解（合成或真实 CSV），写出结果与理论诊断。"""
    _run(ExperimentMode.SOLVE, config_file, out, force, one_based, threads, save_models, log_file, normalize_basis, hybrid_rows)


@app.command("sweep-d")
def sweep_d_cmd(
    config_file: Path = ConfigOption,
    out: Optional[Path] = OutOption,
    force: bool = ForceOption,
    one_based: bool = OneBasedOption,
    threads: Optional[int] = ThreadsOption,
    save_models: bool = SaveModelsOption,
    log_file: Optional[Path] = LogFileOption,
    normalize_basis: bool = NormalizeOption,
    hybrid_rows: bool = HybridOption,
):
    """NMSE 随采样列数 d 的变化（QPMA 与 CUR+ Type 1/2/3 配对比较）。"""
    _run(ExperimentMode.SWEEP_D, config_file, out, force, one_based, threads, save_models, log_file, normalize_basis, hybrid_rows)


@app.command("sweep-noise")
def sweep_noise_cmd(
    config_file: Path = ConfigOption,
    out: Optional[Path] = OutOption,
    force: bool = ForceOption,
    one_based: bool = OneBasedOption,
    threads: Optional[int] = ThreadsOption,
    save_models: bool = SaveModelsOption,
    log_file: Optional[Path] = LogFileOption,
    normalize_basis: bool = NormalizeOption,
    hybrid_rows: bool = HybridOption,
):
    """NMSE 随噪声水平 σ 的变化，同时记录 ‖E‖_F²/‖M‖_F²。"""
    _run(ExperimentMode.SWEEP_NOISE, config_file, out, force, one_based, threads, save_models, log_file, normalize_basis, hybrid_rows)


@app.command("sweep-min-d")
def sweep_min_d_cmd(
    config_file: Path = ConfigOption,
    out: Optional[Path] = OutOption,
    force: bool = ForceOption,
    one_based: bool = OneBasedOption,
    threads: Optional[int] = ThreadsOption,
    save_models: bool = SaveModelsOption,
    log_file: Optional[Path] = LogFileOption,
    normalize_basis: bool = NormalizeOption,
):
    """无噪声精确重建所需的最小 d 随 r 的变化（二分查找）。"""
    _run(ExperimentMode.SWEEP_MIN_D, config_file, out, force, one_based, threads, save_models, log_file, normalize_basis, False)


@app.command("sweep-dr")
def sweep_dr_cmd(
    config_file: Path = ConfigOption,
    out: Optional[Path] = OutOption,
    force: bool = ForceOption,
    one_based: bool = OneBasedOption,
    threads: Optional[int] = ThreadsOption,
    save_models: bool = SaveModelsOption,
    log_file: Optional[Path] = LogFileOption,
    normalize_basis: bool = NormalizeOption,
):
    """CUR+ 的 NMSE 随采样行数 d_r 的变化（固定 d_c，附 QPMA 参照）。"""
    _run(ExperimentMode.SWEEP_DR, config_file, out, force, one_based, threads, save_models, log_file, normalize_basis, False)


@app.command("theory-report")
def theory_report_cmd(
    config_file: Path = ConfigOption,
    out: Optional[Path] = OutOption,
    force: bool = ForceOption,
    one_based: bool = OneBasedOption,
    threads: Optional[int] = ThreadsOption,
    save_models: bool = SaveModelsOption,
    log_file: Optional[Path] = LogFileOption,
    normalize_basis: bool = NormalizeOption,
):
    """求解并写出 theory.json（不相干度、δ、Wedin 残差、Hessian、误差界）。"""
    _run(ExperimentMode.THEORY_REPORT, config_file, out, force, one_based, threads, save_models, log_file, normalize_basis, False)


@app.command("validate")
def validate_cmd(
    config_file: Path = ConfigOption,
    mode: Optional[ExperimentMode] = typer.Option(None, "--mode", help="按指定模式校验（覆盖配置中的 mode）"),
):
    """只检查配置，不运行求解。"""
    setup_logging()
    try:
        cfg = load_experiment_config(config_file, mode=mode)
    except ColCompleteError as e:
        console.print(f"❌ {type(e).__name__}: {e}", style="red", markup=False)
        raise typer.Exit(code=1)

    diagnostics = validate_config(cfg)
    if not diagnostics:
        console.print(f"✅ 配置有效 ({cfg.mode.value})", style="green")
        return
    console.print(f"⚠️  {len(diagnostics)} 条诊断:", style="yellow")
    for item in diagnostics:
        typer.echo(f"  - {item}")


def main():
    config.ensure_dirs()
    app()


if __name__ == "__main__":
    main()
