import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from lhcqed.device import load_bundled
from lhcqed.hamiltonian import TransmonSpec

settings.register_profile("default", max_examples=30, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", max_examples=100, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture(scope="session")
def device():
    return load_bundled("paper-device")


@pytest.fixture(scope="session")
def design_device():
    return load_bundled("table2-device")


@pytest.fixture(scope="session")
def transmon():
    return TransmonSpec(E_C=0.31, E_J0=37.0)


def ghz(f):
    return 2 * np.pi * f * 1e9


def mhz(f):
    return 2 * np.pi * f * 1e6


_ACCEPTANCE = []


@pytest.fixture
def acceptance_report():
    return _ACCEPTANCE


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE):
            terminalreporter.write_line(line)
