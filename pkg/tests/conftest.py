from __future__ import annotations

import json
import sys
from collections.abc import Callable
from pathlib import Path
from typing import Any

import pytest

# Ensure the repository root is on sys.path so `fmean` is importable in tests
ROOT = Path(__file__).resolve().parents[1]
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

from fmean.probability.space import FiniteProbSpace, Partition, RandomVariable  # noqa: E402

# (name, params, low, high): catalog entries with a value range inside their domain.
CATALOG_CASES: list[tuple[str, tuple[float, ...], float, float]] = [
    ("identity", (), -3.0, 3.0),
    ("log", (), 0.2, 3.0),
    ("neg_inverse", (), 0.2, 3.0),
    ("power", (0.5,), 0.2, 3.0),
    ("power", (2.0,), 0.2, 3.0),
    ("power", (-1.5,), 0.2, 3.0),
    ("cara", (1.0,), 0.2, 3.0),
    ("exp", (1.0,), -2.0, 2.0),
    ("exp", (-0.5,), -2.0, 2.0),
    ("sinh", (), -2.0, 2.0),
    ("normal_cdf", (), -3.0, 3.0),
    ("cube", (), -2.0, 2.0),
]


@pytest.fixture
def uniform4() -> FiniteProbSpace:
    return FiniteProbSpace.uniform(4)


@pytest.fixture
def squares(uniform4: FiniteProbSpace) -> RandomVariable:
    return uniform4.variable([1.0, 4.0, 9.0, 16.0])


@pytest.fixture
def halves() -> Partition:
    return Partition.of([[0, 1], [2, 3]], 4)


@pytest.fixture
def write_scenario(tmp_path: Path) -> Callable[..., Path]:
    def _write(payload: dict[str, Any], name: str = "scenario.json") -> Path:
        path = tmp_path / name
        path.write_text(json.dumps(payload), encoding="utf-8")
        return path

    return _write
