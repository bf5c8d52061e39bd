import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from gplab import MonomialWeight

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

WEIGHTS = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.5, 2.0)]


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(params=WEIGHTS, ids=lambda a: "alpha=" + ",".join(f"{v:g}" for v in a))
def weight(request):
    return MonomialWeight(request.param)


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance():
    def record(label, ok, detail):
        ACCEPTANCE_LINES.append(f"{'PASS' if ok else 'FAIL'}  {label}: {detail}")
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
