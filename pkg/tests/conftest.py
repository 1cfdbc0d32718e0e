import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("ci", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("ci")


def exact_cov_data(variances, n, seed=0):
    """Centered d x n data whose sample covariance (1/n) X X^T is exactly diag(variances)."""
    variances = np.asarray(variances, dtype=float)
    rng = np.random.default_rng(seed)
    G = rng.standard_normal((n, len(variances)))
    G -= G.mean(axis=0)
    Q, _ = np.linalg.qr(G)
    return (np.sqrt(n * variances)[:, None]) * Q.T


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, printed after the run
ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"criterion {key:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
