import numpy as np
import pytest

from ssci.data import Dataset, standardize


def random_dataset(n, p, seed, beta=None, sigma=1.0, rho=0.0):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, p))
    if rho:
        for j in range(1, p):
            X[:, j] = rho * X[:, j - 1] + np.sqrt(1 - rho * rho) * X[:, j]
    b = np.zeros(p) if beta is None else np.asarray(beta, dtype=float)
    y = X @ b + sigma * rng.standard_normal(n)
    return standardize(Dataset(y, X))[0]


@pytest.fixture
def small_data():
    b = np.zeros(12)
    b[:3] = (3.0, -2.0, 1.5)
    return random_dataset(60, 12, seed=11, beta=b)


from hypothesis import settings  # noqa: E402

settings.register_profile("repro", derandomize=True, deadline=None, max_examples=60)
settings.load_profile("repro")


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
