import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=100, deadline=None)
settings.load_profile("default")


def theoretical_ar2_autocov(phi1, phi2, gamma0=1.0):
    """Autocovariances for lags 0..2 of a stationary AR(2), scaled to gamma0."""
    rho1 = phi1 / (1.0 - phi2)
    rho2 = phi1 * rho1 + phi2
    return gamma0, gamma0 * rho1, gamma0 * rho2


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


_ACCEPTANCE = {}


@pytest.fixture
def record_criterion():
    """Record one acceptance verdict; all verdicts are printed at the end of the run."""

    def record(number, ok, detail):
        _ACCEPTANCE[number] = (bool(ok), detail)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        ok, detail = _ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")
