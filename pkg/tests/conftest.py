import math

import pytest

from berkson_deconv.spectral import CharacteristicModel as CM
from berkson_deconv.spectral import Scenario, SobolevSpec

SOB = SobolevSpec(1.0, 2.0)


def make_scenario(xi, g, sigma, n=1000, x=None, sobolev=SOB):
    return Scenario(n=n, sigma=sigma, x_model=x or CM.laplace(1.0), xi_model=xi, g_model=g,
                    sobolev=sobolev)


@pytest.fixture
def case_iv():
    return make_scenario(CM.laplace(1.0), CM.gaussian(1.0), 0.5)


@pytest.fixture
def gauss_gauss():
    # f_W = N(0, 1.25); xi only enters the estimator
    return make_scenario(CM.laplace(1.0), CM.gaussian(1.0), 0.5, x=CM.gaussian(1.0))


def rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


__all__ = ["make_scenario", "rel", "math", "ACCEPTANCE_LINES"]


# one summary line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
