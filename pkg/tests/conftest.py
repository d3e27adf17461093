import numpy as np
import pytest

from efcr import reference_scenario
from efcr.model import (
    AffineMap,
    CpuPowerParams,
    ExecTimeParams,
    FrequencyWindow,
    Scenario,
    StaticPower,
)

ACCEPTANCE_LINES = []


@pytest.fixture
def ref():
    """Reference scenario with f_k = 0 and P_back = 0.5 W."""
    return reference_scenario(f_k=0.0, p_back=0.5)


def random_scenario(rng, beta_min=0.0):
    """Random valid scenario with nonnegative parameters."""
    f_min = rng.uniform(0.1, 0.4)
    f_max = rng.uniform(1.2, 3.0)
    return Scenario(
        vmap=AffineMap(rng.uniform(0.1, 1.0), rng.uniform(0.3, 1.2)),
        cpu=CpuPowerParams(rng.uniform(0.05, 0.5), rng.uniform(0.0, 6.0)),
        time=ExecTimeParams(rng.uniform(0.5, 500.0), rng.uniform(0.0, 0.6), rng.uniform(beta_min, 0.3)),
        static_power=StaticPower(rng.uniform(0.0, 0.5), rng.uniform(0.0, 4.0)),
        window=FrequencyWindow(f_min, f_max),
    )


def random_scenarios(n, seed=0, **kw):
    rng = np.random.default_rng(seed)
    return [random_scenario(rng, **kw) for _ in range(n)]


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
