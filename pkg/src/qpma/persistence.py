"""模型目录读写

目录布局：u_a.csv、q_hat.csv、v_qs.csv、z_hat.csv、m_hat.csv 与 meta.json。
CUR+ 模型沿用同一布局（u_a ← Û，v_qs ← V̂，无 q_hat），meta.json 中带 "baseline": "curplus"。
"""
import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Union

import numpy as np

from src.datagen.csv_io import load_csv, save_csv

logger = logging.getLogger(__name__)

MATRIX_FILES = ("u_a", "q_hat", "v_qs", "z_hat", "m_hat")


def save_model_dir(
    directory: Union[str, Path],
    matrices: Dict[str, Optional[np.ndarray]],
    meta: Dict[str, Any],
) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for name in MATRIX_FILES:
        value = matrices.get(name)
        if value is not None:
            save_csv(value, directory / f"{name}.csv")
    with (directory / "meta.json").open("w", encoding="utf-8") as handle:
        json.dump(meta, handle, indent=2, ensure_ascii=False, sort_keys=True)
    logger.debug(f"模型已保存: {directory}")
    return directory


def load_model_dir(directory: Union[str, Path]) -> Dict[str, Any]:
    """返回 {name: ndarray, ..., "meta": dict}"""
    directory = Path(directory)
    loaded: Dict[str, Any] = {}
    for name in MATRIX_FILES:
        path = directory / f"{name}.csv"
        if path.exists():
            loaded[name] = load_csv(path)
    with (directory / "meta.json").open("r", encoding="utf-8") as handle:
        loaded["meta"] = json.load(handle)
    return loaded


def save_model(model, directory: Union[str, Path], extra: Optional[Dict[str, Any]] = None) -> Path:
    """保存 QpmaModel"""
    meta: Dict[str, Any] = {
        "baseline": "qpma",
        "config": model.config.model_dump(mode="json") if model.config is not None else None,
        "sampler": {"m": model.sampler.m, "indices": list(model.sampler.indices)} if model.sampler else None,
        "iters_q": model.iters_q,
        "iters_z": model.iters_z,
        "final_q_objective": model.final_q_objective,
        "final_z_objective": model.final_z_objective,
    }
    meta.update(extra or {})
    return save_model_dir(
        directory,
        {"u_a": model.u_a, "q_hat": model.q_hat, "v_qs": model.v_qs, "z_hat": model.z_hat, "m_hat": model.m_hat},
        meta,
    )
