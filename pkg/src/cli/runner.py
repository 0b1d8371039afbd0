"""实验编排

配置加载与校验、各模式的试验循环、结果落盘（results.csv / summary.json / theory.json）。
每个试验只依赖 (config, trial) 派生的种子，可并行执行；结果按试验序号顺序写出。
"""
import csv
import json
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple, Union

import numpy as np
from pydantic import ValidationError
from scipy.stats import binomtest

from src.common.config import config
from src.common.errors import ArgumentError, ColCompleteError, ConfigError, StageError
from src.common.models import (
    RESULT_COLUMNS,
    CurPlusSpec,
    ExperimentConfig,
    ExperimentMode,
    Method,
    Orientation,
    QpmaConfig,
    SyntheticSpec,
    TrialRecord,
)
from src.curplus.budgets import make_type
from src.curplus.solver import cur_solve, save_cur_model
from src.datagen.csv_io import load_csv, load_grid
from src.datagen.synthetic import generate
from src.linalg.matrix import frobenius_norm
from src.metrics.evaluation import evaluate
from src.polybasis.basis import build_basis, default_grid
from src.qpma.persistence import save_model
from src.qpma.solver import QpmaModel, solve
from src.sampling.columns import ColumnSampler, build_sampler, nested_order, prefix_sampler, sample_columns
from src.theory.report import safe_theory_report

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

CUR_ROW_SWEEP_LABEL = "cur+"


# ---------------------------------------------------------------------------
# 配置
# ---------------------------------------------------------------------------

def load_experiment_config(
    path: PathLike,
    mode: Optional[Union[str, ExperimentMode]] = None,
    overrides: Optional[Dict[str, Any]] = None,
) -> ExperimentConfig:
    """读取 JSON 配置；mode 与 overrides 为命令行参数，优先于文件中的值（None 表示未给出）"""
    source = str(path)
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError as err:
        raise ConfigError("config file not found", path=source) from err
    except json.JSONDecodeError as err:
        raise ConfigError(f"invalid JSON at line {err.lineno}: {err.msg}", path=source) from err
    if not isinstance(raw, dict):
        raise ConfigError("top-level JSON value must be an object", path=source)

    if mode is not None:
        raw["mode"] = ExperimentMode(mode).value
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key == "normalize_basis":
            qpma = raw.get("qpma")
            if isinstance(qpma, dict):
                raw["qpma"] = {**qpma, "normalize_basis": value}
        else:
            raw[key] = value

    try:
        return ExperimentConfig.model_validate(raw)
    except ValidationError as err:
        raise ConfigError.from_validation(source, err.errors()) from err


def _data_shape(cfg: ExperimentConfig) -> Tuple[int, int]:
    if cfg.data.synthetic is not None:
        return cfg.data.synthetic.n, cfg.data.synthetic.m
    n, m = load_csv(cfg.data.path).shape
    return (m, n) if cfg.data.orientation is Orientation.ROWS_ARE_POINTS else (n, m)


def missing_fields(cfg: ExperimentConfig) -> List[str]:
    """缺少当前模式必需字段时无法运行"""
    problems: List[str] = []
    mode = cfg.mode
    if mode in (ExperimentMode.SOLVE, ExperimentMode.THEORY_REPORT, ExperimentMode.SWEEP_NOISE):
        if cfg.d is None and not cfg.columns:
            problems.append(f"{mode.value} needs 'd' or 'columns'")
    if mode is ExperimentMode.SWEEP_D and not cfg.d_values:
        problems.append("sweep-d needs a non-empty 'd_values'")
    if mode is ExperimentMode.SWEEP_NOISE and not cfg.noise_sigmas:
        problems.append("sweep-noise needs a non-empty 'noise_sigmas'")
    if mode is ExperimentMode.SWEEP_MIN_D and not cfg.ranks:
        problems.append("sweep-min-d needs a non-empty 'ranks'")
    if mode is ExperimentMode.SWEEP_DR and ((cfg.d_cols is None and not cfg.columns) or not cfg.d_rows_values):
        problems.append("sweep-dr needs 'd_cols' (or 'columns') and a non-empty 'd_rows_values'")
    if mode in (ExperimentMode.SWEEP_NOISE, ExperimentMode.SWEEP_MIN_D) and cfg.data.synthetic is None:
        problems.append(f"{mode.value} needs synthetic data")
    if mode is ExperimentMode.SWEEP_MIN_D and cfg.data.synthetic is not None and cfg.data.synthetic.noise_sigma != 0:
        problems.append(f"sweep-min-d needs noiseless data (noise_sigma={cfg.data.synthetic.noise_sigma:g})")
    if cfg.data.path is not None and not Path(cfg.data.path).is_file():
        problems.append(f"data file not found: {cfg.data.path}")
    if cfg.data.grid_file is not None and not Path(cfg.data.grid_file).is_file():
        problems.append(f"grid file not found: {cfg.data.grid_file}")
    return problems


def _sampled_counts(cfg: ExperimentConfig) -> List[int]:
    if cfg.mode is ExperimentMode.SWEEP_D:
        return list(cfg.d_values)
    if cfg.mode is ExperimentMode.SWEEP_DR:
        if cfg.columns:
            return [len(cfg.columns)]
        return [cfg.d_cols] if cfg.d_cols is not None else []
    if cfg.mode is ExperimentMode.SWEEP_MIN_D:
        return []
    if cfg.columns:
        return [len(cfg.columns)]
    return [cfg.d] if cfg.d is not None else []


def validate_config(cfg: ExperimentConfig) -> List[str]:
    """不运行求解，返回配置诊断列表（空列表表示无问题）"""
    diagnostics = missing_fields(cfg)
    if any(p.startswith(("data file", "grid file")) for p in diagnostics):
        return diagnostics
    try:
        n, m = _data_shape(cfg)
    except ColCompleteError as err:
        return diagnostics + [f"cannot read data: {err}"]

    r = cfg.qpma.target_rank
    if cfg.qpma.degree + 1 > m:
        diagnostics.append(f"degree+1={cfg.qpma.degree + 1} exceeds column count m={m}")
    if cfg.columns:
        try:
            build_sampler(m, cfg.columns, one_based=cfg.one_based)
        except ColCompleteError as err:
            diagnostics.append(f"invalid columns: {err}")

    for d in _sampled_counts(cfg):
        if d > m:
            diagnostics.append(f"d={d} exceeds column count m={m}")
        if r > d:
            diagnostics.append(f"target rank exceeds sampled columns (r={r} > d={d}; regime r ≤ d ≤ k)")
        for method in cfg.methods:
            variant = method.cur_variant
            if variant in (2, 3) and d // 2 < r:
                diagnostics.append(f"CUR+ Type {variant} samples d/2={d // 2} columns < target rank r={r}")
            if variant is not None and variant > 0 and d > n:
                diagnostics.append(f"CUR+ Type {variant} with d={d} samples more rows than n={n}")

    if cfg.mode is ExperimentMode.SWEEP_DR:
        for d_r in cfg.d_rows_values:
            if d_r > n:
                diagnostics.append(f"d_rows={d_r} exceeds row count n={n}")
    if cfg.mode is ExperimentMode.SWEEP_MIN_D:
        for rank in cfg.ranks:
            if rank > m:
                diagnostics.append(f"rank r={rank} exceeds column count m={m}")
    return diagnostics


# ---------------------------------------------------------------------------
# 数据
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Problem:
    """一次试验的真值矩阵；合成数据额外携带 QS 与 E"""
    m_true: np.ndarray
    grid: Tuple[float, ...]
    qs: Optional[np.ndarray] = None
    e_true: Optional[np.ndarray] = None
    sigma: Optional[float] = None
    k_proxy: Optional[int] = None

    @property
    def n(self) -> int:
        return self.m_true.shape[0]

    @property
    def m(self) -> int:
        return self.m_true.shape[1]

    @property
    def noise_ratio(self) -> Optional[float]:
        if self.e_true is None:
            return None
        total = frobenius_norm(self.m_true)
        return frobenius_norm(self.e_true) ** 2 / total ** 2 if total > 0 else None


def synthetic_problem(spec: SyntheticSpec, trial_seed: int, **updates) -> Problem:
    """按试验种子平移 q_seed / noise_seed 后生成实例"""
    spec = spec.model_copy(update={
        "q_seed": spec.q_seed + trial_seed,
        "noise_seed": spec.noise_seed + trial_seed,
        **updates,
    })
    instance = generate(spec)
    return Problem(
        m_true=instance.m_true,
        grid=tuple(instance.s.grid),
        qs=instance.qs,
        e_true=instance.e_true,
        sigma=spec.noise_sigma,
        k_proxy=spec.k_proxy,
    )


def real_problem(cfg: ExperimentConfig) -> Problem:
    """读取真实矩阵 CSV；朝向由配置决定"""
    mtx = load_csv(cfg.data.path)
    if cfg.data.orientation is Orientation.ROWS_ARE_POINTS:
        mtx = mtx.T
    m = mtx.shape[1]
    if cfg.data.grid_file is not None:
        grid = load_grid(cfg.data.grid_file)
        if len(grid) != m:
            raise ConfigError(f"grid has {len(grid)} points but matrix has {m} columns", path="data", field="grid_file")
    else:
        grid = default_grid(m)
    logger.info(f"读取真实数据: {cfg.data.path} ({mtx.shape[0]}x{m}, {cfg.data.orientation.value})")
    return Problem(m_true=mtx, grid=tuple(grid))


# ---------------------------------------------------------------------------
# 单次测量
# ---------------------------------------------------------------------------

def error_text(err: Exception) -> str:
    if isinstance(err, StageError):
        return str(err)
    return f"{type(err).__name__}: {err}"


def _shrink(sampler: ColumnSampler, order: Optional[np.ndarray], k: int) -> ColumnSampler:
    """同一试验中的更小列集合：随机顺序取前缀，显式列取前 k 个"""
    if k == sampler.d:
        return sampler
    if order is not None:
        return prefix_sampler(order, k)
    return build_sampler(sampler.m, sampler.indices[:k])


@dataclass
class TrialOutput:
    records: List[TrialRecord] = field(default_factory=list)
    theory: List[Dict[str, Any]] = field(default_factory=list)


@dataclass
class RunResult:
    out_dir: Path
    records: List[TrialRecord]
    summary: Dict[str, Any]
    theory: List[Dict[str, Any]]


class ExperimentRunner:
    """按 ExperimentConfig 执行一次完整实验并写出结果文件"""

    def __init__(self, cfg: ExperimentConfig, out_dir: Optional[PathLike] = None):
        self.cfg = cfg
        self.out_dir = Path(out_dir or cfg.output_dir or config.RESULTS_DIR / cfg.mode.value)
        self._real: Optional[Problem] = None
        # QPMA 先于 CUR+ 运行，hybrid_rows 需要同一试验的 V̂_QS
        self.methods = sorted(dict.fromkeys(cfg.methods), key=lambda item: item is not Method.QPMA)

    # -- 入口 -----------------------------------------------------------------

    def run(self) -> RunResult:
        problems = missing_fields(self.cfg)
        if problems:
            raise ConfigError("; ".join(problems), path="config")
        self._prepare_out_dir()
        if self.cfg.data.path is not None:
            self._real = real_problem(self.cfg)

        logger.info(
            f"开始实验: mode={self.cfg.mode.value}, trials={self.cfg.trials}, "
            f"methods={[m.value for m in self.methods]}, threads={self.cfg.threads}, out={self.out_dir}"
        )
        trial_ids = range(self.cfg.trials)
        if self.cfg.threads > 1:
            with ThreadPoolExecutor(max_workers=self.cfg.threads) as pool:
                outputs = list(pool.map(self._run_trial, trial_ids))
        else:
            outputs = [self._run_trial(t) for t in trial_ids]

        records = [rec for out in outputs for rec in out.records]
        theory = [rep for out in outputs for rep in out.theory]
        summary = summarize(self.cfg, records)

        write_results(records, self.out_dir / "results.csv")
        _write_json(summary, self.out_dir / "summary.json")
        if theory:
            _write_json(theory, self.out_dir / "theory.json")
        failed = sum(1 for rec in records if rec.error)
        logger.info(f"实验完成: {len(records)} 行, 失败 {failed} 行, 输出 {self.out_dir}")
        return RunResult(out_dir=self.out_dir, records=records, summary=summary, theory=theory)

    def _prepare_out_dir(self) -> None:
        if self.out_dir.exists():
            if not self.out_dir.is_dir():
                raise ArgumentError(f"output path {self.out_dir} is not a directory")
            if any(self.out_dir.iterdir()) and not self.cfg.force:
                raise ArgumentError(f"output directory {self.out_dir} is not empty (use --force to overwrite)")
        self.out_dir.mkdir(parents=True, exist_ok=True)

    # -- 试验 -----------------------------------------------------------------

    def _trial_seed(self, trial: int) -> int:
        return self.cfg.seed + trial

    def _problem(self, seed: int, **updates) -> Problem:
        if self._real is not None:
            return self._real
        return synthetic_problem(self.cfg.data.synthetic, seed, **updates)

    def _qpma_config(self, seed: int, **updates) -> QpmaConfig:
        return self.cfg.qpma.model_copy(update={"seed": seed, **updates})

    def _run_trial(self, trial: int) -> TrialOutput:
        mode = self.cfg.mode
        if mode in (ExperimentMode.SOLVE, ExperimentMode.THEORY_REPORT):
            return self._trial_solve(trial)
        if mode is ExperimentMode.SWEEP_D:
            return self._trial_sweep_d(trial)
        if mode is ExperimentMode.SWEEP_NOISE:
            return self._trial_sweep_noise(trial)
        if mode is ExperimentMode.SWEEP_MIN_D:
            return self._trial_min_d(trial)
        return self._trial_sweep_dr(trial)

    def _base(self, trial: int, seed: int, problem: Problem, method: str, qcfg: QpmaConfig, **extra) -> Dict[str, Any]:
        base = {
            "mode": self.cfg.mode,
            "method": method,
            "trial": trial,
            "seed": seed,
            "n": problem.n,
            "m": problem.m,
            "r": qcfg.target_rank,
            "l": qcfg.degree,
            "k_proxy": problem.k_proxy,
            "sigma": problem.sigma,
            "noise_ratio": problem.noise_ratio if self.cfg.mode is ExperimentMode.SWEEP_NOISE else None,
        }
        base.update(extra)
        return base

    def _measure(self, base: Dict[str, Any], problem: Problem, fn: Callable[[], Tuple[np.ndarray, int, int, Any]]):
        """执行一次重建并评估；库异常记入 error 列"""
        start = time.perf_counter()
        try:
            m_hat, iters, budget, model = fn()
            result = evaluate(m_hat, problem.m_true)
        except ColCompleteError as err:
            logger.warning(f"试验失败: method={base['method']} trial={base['trial']} d={base.get('d')}: {error_text(err)}")
            return TrialRecord(**base, error=error_text(err)), None
        elapsed = time.perf_counter() - start
        record = TrialRecord(
            **base,
            nmse=result.nmse,
            sq_spectral_err=result.sq_spectral_err,
            iters=iters,
            budget=budget,
            wallclock=elapsed if self.cfg.record_wallclock else None,
        )
        return record, model

    def _qpma(self, problem: Problem, sampler: ColumnSampler, qcfg: QpmaConfig):
        basis = build_basis(problem.grid, qcfg.degree, normalize=qcfg.normalize_basis)
        model = solve(sample_columns(problem.m_true, sampler), sampler, basis, qcfg)
        return model.m_hat, model.iters_q + model.iters_z, problem.n * sampler.d, model

    def _cur(self, problem: Problem, spec: CurPlusSpec, columns: ColumnSampler, hybrid_v: Optional[np.ndarray]):
        model = cur_solve(problem.m_true, spec, columns=columns, hybrid_v=hybrid_v)
        return model.m_hat, model.iters, model.sample_budget, model

    def _save(self, trial: int, label: str, model: Any) -> None:
        if not self.cfg.save_models or model is None:
            return
        directory = self.out_dir / "models" / f"trial-{trial:03d}" / label
        if isinstance(model, QpmaModel):
            save_model(model, directory, extra={"trial": trial})
        else:
            save_cur_model(model, directory, extra={"trial": trial})

    def _compare_at(
        self,
        trial: int,
        seed: int,
        problem: Problem,
        sampler: ColumnSampler,
        order: Optional[np.ndarray],
        label_suffix: str = "",
    ) -> Tuple[List[TrialRecord], Optional[QpmaModel]]:
        """同一试验、同一列预算下依次运行 QPMA 与各 CUR+ 类型（配对种子）"""
        qcfg = self._qpma_config(seed)
        d = sampler.d
        records: List[TrialRecord] = []
        qpma_model: Optional[QpmaModel] = None
        for method in self.methods:
            base = self._base(trial, seed, problem, method.value, qcfg, d=d)
            if method is Method.QPMA:
                record, qpma_model = self._measure(base, problem, lambda: self._qpma(problem, sampler, qcfg))
                self._save(trial, f"qpma-d{d}{label_suffix}", qpma_model)
            else:
                hybrid_v = qpma_model.v_qs if qpma_model is not None else None

                def run_cur(variant=method.cur_variant, hybrid_v=hybrid_v):
                    spec = make_type(
                        variant, problem.n, problem.m, d, qcfg.target_rank, seed,
                        hybrid_rows=self.cfg.hybrid_rows, max_iters=qcfg.max_iters,
                    )
                    return self._cur(problem, spec, _shrink(sampler, order, spec.d_cols), hybrid_v)

                record, cur_model = self._measure(base, problem, run_cur)
                if cur_model is not None:
                    record = record.model_copy(update={"d_rows": len(cur_model.row_indices)})
                self._save(trial, f"{method.value}-d{d}{label_suffix}", cur_model)
            records.append(record)
        return records, qpma_model

    def _trial_solve(self, trial: int) -> TrialOutput:
        seed = self._trial_seed(trial)
        problem = self._problem(seed)
        if self.cfg.columns:
            sampler = build_sampler(problem.m, self.cfg.columns, one_based=self.cfg.one_based)
            order = None
        else:
            order = nested_order(problem.m, seed)
            sampler = prefix_sampler(order, self.cfg.d)
        records, model = self._compare_at(trial, seed, problem, sampler, order)

        output = TrialOutput(records=records)
        if model is not None:
            basis = build_basis(problem.grid, model.config.degree, normalize=model.config.normalize_basis)
            report = safe_theory_report(
                problem.m_true,
                sample_columns(problem.m_true, sampler),
                basis,
                model,
                qs=problem.qs,
                e_true=problem.e_true,
                variant=self.cfg.bound_variant,
                t1=self.cfg.t1,
                t2=self.cfg.t2,
            )
            if report is not None:
                output.theory.append({"trial": trial, "seed": seed, **report.model_dump(mode="json")})
        return output

    def _trial_sweep_d(self, trial: int) -> TrialOutput:
        seed = self._trial_seed(trial)
        problem = self._problem(seed)
        order = nested_order(problem.m, seed)
        output = TrialOutput()
        for d in self.cfg.d_values:
            try:
                sampler = prefix_sampler(order, d)
            except ColCompleteError as err:
                for method in self.methods:
                    base = self._base(trial, seed, problem, method.value, self.cfg.qpma, d=d)
                    output.records.append(TrialRecord(**base, error=error_text(err)))
                continue
            records, _ = self._compare_at(trial, seed, problem, sampler, order)
            output.records.extend(records)
        return output

    def _trial_sweep_noise(self, trial: int) -> TrialOutput:
        seed = self._trial_seed(trial)
        output = TrialOutput()
        for i, sigma in enumerate(self.cfg.noise_sigmas):
            # 同一试验内 Q 与噪声方向固定，只改变 σ
            problem = self._problem(seed, noise_sigma=float(sigma))
            order = nested_order(problem.m, seed)
            sampler = prefix_sampler(order, self.cfg.d)
            records, _ = self._compare_at(trial, seed, problem, sampler, order, label_suffix=f"-s{i}")
            output.records.extend(records)
        return output

    def _trial_sweep_dr(self, trial: int) -> TrialOutput:
        seed = self._trial_seed(trial)
        problem = self._problem(seed)
        qcfg = self._qpma_config(seed)
        if self.cfg.columns:
            sampler = build_sampler(problem.m, self.cfg.columns, one_based=self.cfg.one_based)
        else:
            sampler = prefix_sampler(nested_order(problem.m, seed), self.cfg.d_cols)
        d_c = sampler.d
        output = TrialOutput()

        if Method.QPMA in self.methods:
            base = self._base(trial, seed, problem, Method.QPMA.value, qcfg, d=d_c)
            record, model = self._measure(base, problem, lambda: self._qpma(problem, sampler, qcfg))
            self._save(trial, f"qpma-d{d_c}", model)
            output.records.append(record)

        for d_r in self.cfg.d_rows_values:
            base = self._base(trial, seed, problem, CUR_ROW_SWEEP_LABEL, qcfg, d=d_c, d_rows=d_r)

            def run_cur(d_r=d_r):
                spec = CurPlusSpec(
                    d_rows=d_r, d_cols=d_c, extra_entries=0, r=qcfg.target_rank,
                    seed=seed, max_iters=qcfg.max_iters,
                )
                return self._cur(problem, spec, sampler, None)

            try:
                record, model = self._measure(base, problem, run_cur)
            except ValidationError as err:
                record, model = TrialRecord(**base, error=f"ValidationError: {err.errors()[0]['msg']}"), None
            self._save(trial, f"cur-dr{d_r}", model)
            output.records.append(record)
        return output

    def _trial_min_d(self, trial: int) -> TrialOutput:
        """对每个 r 二分查找 NMSE < success_nmse 的最小 d（列集合嵌套）"""
        seed = self._trial_seed(trial)
        output = TrialOutput()
        for rank in self.cfg.ranks:
            problem = self._problem(seed, degree=rank - 1)
            qcfg = self._qpma_config(seed, target_rank=rank, degree=rank - 1)
            order = nested_order(problem.m, seed)
            cache: Dict[int, TrialRecord] = {}

            def attempt(d: int) -> TrialRecord:
                if d not in cache:
                    base = self._base(trial, seed, problem, Method.QPMA.value, qcfg, d=d)
                    cache[d] = self._measure(base, problem, lambda: self._qpma(problem, prefix_sampler(order, d), qcfg))[0]
                return cache[d]

            def succeeded(d: int) -> bool:
                rec = attempt(d)
                return rec.ok and rec.nmse < self.cfg.success_nmse

            lo, hi = rank, problem.m
            if not succeeded(hi):
                base = self._base(trial, seed, problem, Method.QPMA.value, qcfg)
                output.records.append(TrialRecord(
                    **base,
                    nmse=cache[hi].nmse,
                    error=cache[hi].error or f"no d ≤ m={problem.m} reaches NMSE < {self.cfg.success_nmse:g}",
                ))
                continue
            while lo < hi:
                mid = (lo + hi) // 2
                if succeeded(mid):
                    hi = mid
                else:
                    lo = mid + 1
            logger.info(f"最小 d: trial={trial}, r={rank}, d={hi}（{len(cache)} 次求解）")
            output.records.append(attempt(hi))
        return output


# ---------------------------------------------------------------------------
# 汇总与输出
# ---------------------------------------------------------------------------

def _group_key(rec: TrialRecord) -> Tuple:
    return rec.method, rec.r, rec.d, rec.d_rows if rec.method == CUR_ROW_SWEEP_LABEL else None, rec.sigma


def summarize(cfg: ExperimentConfig, records: List[TrialRecord]) -> Dict[str, Any]:
    """按 (method, r, d, d_r, σ) 分组统计 NMSE 均值/标准差，并做 QPMA 与 CUR+ 的配对符号检验"""
    groups: Dict[Tuple, List[TrialRecord]] = {}
    for rec in records:
        groups.setdefault(_group_key(rec), []).append(rec)

    rows = []
    for (method, r, d, d_rows, sigma), members in groups.items():
        values = np.array([rec.nmse for rec in members if rec.ok], dtype=np.float64)
        rows.append({
            "method": method,
            "r": r,
            "d": d,
            "d_rows": d_rows,
            "sigma": sigma,
            "trials": len(members),
            "failures": sum(1 for rec in members if not rec.ok),
            "mean_nmse": float(values.mean()) if values.size else None,
            "std_nmse": float(values.std()) if values.size else None,
        })

    summary: Dict[str, Any] = {"mode": cfg.mode.value, "groups": rows, "paired": _paired_tests(records)}
    if cfg.mode is ExperimentMode.SWEEP_MIN_D:
        summary["min_d"] = _min_d_summary(records)
        values = [item["min_d"] for item in summary["min_d"]]
        summary["min_d_monotone"] = all(a <= b for a, b in zip(values, values[1:]))
        if not summary["min_d_monotone"]:
            logger.warning(f"最小 d 随 r 非单调: {values}")
    return summary


def _paired_tests(records: List[TrialRecord]) -> List[Dict[str, Any]]:
    """同一 (trial, d, σ) 上 QPMA 与每种 CUR+ 的 NMSE 比较，单侧二项符号检验"""
    reference = {
        (rec.trial, rec.d, rec.sigma): rec.nmse
        for rec in records
        if rec.method == Method.QPMA.value and rec.ok
    }
    tallies: Dict[Tuple[str, Optional[int], Optional[float]], List[int]] = {}
    for rec in records:
        if rec.method == Method.QPMA.value or rec.method == CUR_ROW_SWEEP_LABEL or not rec.ok:
            continue
        qpma_nmse = reference.get((rec.trial, rec.d, rec.sigma))
        if qpma_nmse is None or qpma_nmse == rec.nmse:
            continue
        tally = tallies.setdefault((rec.method, rec.d, rec.sigma), [0, 0])
        tally[0 if qpma_nmse < rec.nmse else 1] += 1

    paired = []
    for (method, d, sigma), (wins, losses) in tallies.items():
        p_value = binomtest(wins, wins + losses, 0.5, alternative="greater").pvalue
        paired.append({
            "baseline": method,
            "d": d,
            "sigma": sigma,
            "qpma_wins": wins,
            "qpma_losses": losses,
            "p_value": float(p_value),
        })
    return paired


def _min_d_summary(records: List[TrialRecord]) -> List[Dict[str, Any]]:
    """每个 r 取各试验最小 d 的最大值，并拟合 d ≤ c·r·ln(r+1) 中的 c"""
    per_rank: Dict[int, List[int]] = {}
    for rec in records:
        if rec.ok and rec.d is not None:
            per_rank.setdefault(rec.r, []).append(rec.d)
    ranks = sorted(per_rank)
    c = max((max(per_rank[r]) / (r * math.log(r + 1)) for r in ranks), default=None)
    return [
        {
            "r": r,
            "min_d": max(per_rank[r]),
            "r_ln_r": r * math.log(r + 1),
            "fitted_c": c,
            "envelope": c * r * math.log(r + 1),
        }
        for r in ranks
    ]


def _format(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return config.FLOAT_FORMAT % value
    return str(value)


def write_results(records: List[TrialRecord], path: PathLike) -> Path:
    """results.csv：固定表头，实数 17 位有效数字"""
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(RESULT_COLUMNS)
        for rec in records:
            row = rec.model_dump(mode="json")
            row["mode"] = rec.mode.value
            writer.writerow([_format(row[col]) for col in RESULT_COLUMNS])
    return path


def _write_json(payload: Any, path: Path) -> None:
    with path.open("w", encoding="utf-8") as handle:
        json.dump(payload, handle, indent=2, ensure_ascii=False, sort_keys=True)


def run_experiment(cfg: ExperimentConfig, out_dir: Optional[PathLike] = None) -> RunResult:
    return ExperimentRunner(cfg, out_dir).run()
