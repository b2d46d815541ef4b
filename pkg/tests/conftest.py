import os
import sys

import numpy as np
import pytest

project_root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, project_root)

from tools.general_tools import ENV_PREFIX


@pytest.fixture(autouse=True)
def _isolate_env(monkeypatch):
    """Keep DECOMPOUND_* variables from a developer's .env out of the tests."""
    for key in list(os.environ):
        if key.startswith(ENV_PREFIX):
            monkeypatch.delenv(key, raising=False)


@pytest.fixture
def claims_dir():
    return os.path.join(project_root, "data", "claims")


@pytest.fixture
def x_grid():
    return np.linspace(-4.0, 4.0, 201)
