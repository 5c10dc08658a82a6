import numpy as np
import pytest


def piecewise_constant(rng, n, n_changes, jump_sd=3.0, sigma=1.0):
    """Gaussian noise around a random step function."""
    cps = np.sort(rng.choice(np.arange(1, n), size=min(n_changes, n - 1), replace=False))
    lengths = np.diff(np.r_[0, cps, n])
    means = np.repeat(rng.normal(0.0, jump_sd, lengths.size), lengths)
    return means + rng.normal(0.0, sigma, n)


def rel_close(a, b, rtol=1e-9):
    return abs(a - b) <= rtol * max(1.0, abs(a), abs(b))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def step_series():
    return np.array([1.0, 1.0, 1.0, 10.0, 10.0, 10.0])
