import math

import pytest

from sma_truss.constitutive import CUZNALNI
from sma_truss.control import ControllerConfig
from sma_truss.dynamics import TrussParams
from sma_truss.engine import Scenario, run_scenario

ALPHA2 = CUZNALNI.a2 / (CUZNALNI.a1 * CUZNALNI.T_M)
ALPHA3 = CUZNALNI.a3 / (CUZNALNI.a1 * CUZNALNI.T_M)

# one line per acceptance criterion, printed at the end of the session
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def nominal_params():
    return TrussParams(theta=0.69, xi=0.05, gamma=0.020, Omega=0.5, alpha2=ALPHA2, alpha3=ALPHA3, b=0.866)


def nominal_controller(fuzzy: bool = False, **kw) -> ControllerConfig:
    return ControllerConfig(theta=0.69, xi=0.05, b=0.866, fuzzy_enabled=fuzzy, **kw)


def perfect_controller(**kw) -> ControllerConfig:
    return ControllerConfig(theta=0.69, xi=0.05, b=0.866, alpha2_hat=ALPHA2, alpha3_hat=ALPHA3, **kw)


_RUNS = {}


def timed_run(scenario: Scenario):
    """Run once per session and remember the wall time."""
    import time

    key = repr(scenario)
    if key not in _RUNS:
        t0 = time.perf_counter()
        result = run_scenario(scenario)
        _RUNS[key] = (result, time.perf_counter() - t0)
    return _RUNS[key]


@pytest.fixture(scope="session")
def nominal_runs(nominal_params):
    """Uncontrolled, FL and fuzzy-FL runs of the headline scenario (duration 1000)."""
    return {
        "uncontrolled": timed_run(Scenario(nominal_params)),
        "fl": timed_run(Scenario(nominal_params, nominal_controller())),
        "fuzzy-fl": timed_run(Scenario(nominal_params, nominal_controller(fuzzy=True))),
    }


NOMINAL_PLANT_RATE = 1000 * 0.5 / math.pi
