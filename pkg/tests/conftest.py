"""共享测试夹具"""
import json
from pathlib import Path
from typing import Any, Callable, Dict

import numpy as np
import pytest

from helpers import planted
from src.datagen.synthetic import Instance


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(0)


@pytest.fixture
def noiseless_instance() -> Instance:
    """n=m=40, l=4, E=0"""
    return planted()


@pytest.fixture
def write_config(tmp_path: Path) -> Callable[..., Path]:
    """把配置字典写为 JSON 文件"""

    def _write(payload: Dict[str, Any], name: str = "config.json") -> Path:
        path = tmp_path / name
        path.write_text(json.dumps(payload), encoding="utf-8")
        return path

    return _write
