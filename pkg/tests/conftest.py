import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from hermcalc import generators as gen

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def rng():
    return gen.rng_for(12345)


def seeds(n, *keys):
    """Independent generators for parametrized loops."""
    return [gen.rng_for(2024, *keys, k) for k in range(n)]


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def close(a, b, tol):
    return abs(a - b) <= tol


def allclose(A, B, tol=1e-10):
    A, B = np.asarray(A), np.asarray(B)
    return A.shape == B.shape and (A.size == 0 or float(np.max(np.abs(A - B))) <= tol)
