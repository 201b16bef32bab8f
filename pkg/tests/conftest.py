import json
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from guided_support.geometry import Ball
from guided_support.posterior import MixtureModel

settings.register_profile("default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

DATA = Path(__file__).parent / "data"

# acceptance lines collected by tests/test_acceptance.py
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def goldens():
    return json.loads((DATA / "goldens.json").read_text())


@pytest.fixture(scope="session")
def two_ball():
    return MixtureModel((0.5, 0.5), (Ball((-2.0, 0.0), 1.0), Ball((2.0, 0.0), 1.0)), target=1)


@pytest.fixture(scope="session")
def one_ball():
    return MixtureModel((1.0,), (Ball((0.0, 0.0), 1.0),), target=0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
