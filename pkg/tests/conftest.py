import numpy as np
import pytest

# report lines collected by test_acceptance and echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def low_rank(n, d, r, seed=0):
    rng = np.random.default_rng(seed)
    return rng.standard_normal((n, r)) @ rng.standard_normal((r, d))


def clustered_basis(n, k, r, alpha, d=None):
    """Rows ``alpha_i e_i`` repeated ``n/k`` times; ``alpha_i^2 = alpha`` for ``i < r``, else 1."""
    d = k if d is None else d
    scale = np.where(np.arange(k) < r, np.sqrt(alpha), 1.0)
    rows = np.zeros((k, d))
    rows[np.arange(k), np.arange(k)] = scale
    return np.repeat(rows, n // k, axis=0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
