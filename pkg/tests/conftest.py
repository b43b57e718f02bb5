import numpy as np
import pytest

from fctlp import config
from fctlp.schemas import BoundarySpec


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(autouse=True)
def _isolated_settings(tmp_path, monkeypatch):
    monkeypatch.setattr(config, "OUTPUT_DIR", str(tmp_path / "runs"))
    monkeypatch.setattr(config, "STRICT_CFL", True)


@pytest.fixture
def periodic():
    return BoundarySpec(kind="periodic")


@pytest.fixture
def extend():
    return BoundarySpec(kind="extend_constant")
