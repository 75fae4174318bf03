import logging

import numpy as np
import pytest

from apedit.logs import logs


@pytest.fixture(scope="session", autouse=True)
def _quiet_logs():
    logs.setLevel(logging.ERROR)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(0)
