import os
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from quc.fixtures import load_instance

settings.register_profile(
    "default", deadline=None, suppress_health_check=[HealthCheck.too_slow], max_examples=60
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

DATA = Path(__file__).resolve().parents[1] / "src" / "quc" / "data"
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def appendix():
    return load_instance()


@pytest.fixture(scope="session")
def toy():
    return load_instance(DATA / "toy_uc.json")


@pytest.fixture(scope="session")
def toy2():
    return load_instance(DATA / "toy2_uc.json")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
