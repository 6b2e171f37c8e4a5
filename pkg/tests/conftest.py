import numpy as np
import pytest

from quenched_portfolio import MarketParams, MarketSample, sample_market


def identity_sample(means) -> MarketSample:
    """Sample whose Wishart matrix is exactly the identity (orthonormal rows, p = N + 1)."""
    n = len(means)
    x = np.zeros((n, n + 1))
    x[:, :n] = np.eye(n)
    return MarketSample(x, np.asarray(means, dtype=float), 0)


@pytest.fixture
def eye2():
    """J = I, N = 2, r = (0, 2): a = 1, b = 1, c = 2, D = 1."""
    return identity_sample([0.0, 2.0])


SMALL_PARAMS = MarketParams(n_assets=6, n_scenarios=12, master_seed=2024)


@pytest.fixture
def small_sample():
    return sample_market(SMALL_PARAMS, 0)


def small_instances(count=20):
    return [sample_market(SMALL_PARAMS, c) for c in range(count)]


# acceptance lines are collected here and printed in the terminal summary
_ACCEPTANCE: list = []


@pytest.fixture
def criterion():
    def record(name: str, passed: bool, detail: str = ""):
        _ACCEPTANCE.append((name, passed, detail))
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in _ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {name}  {detail}")
