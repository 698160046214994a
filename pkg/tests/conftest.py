import math

import numpy as np
import pytest

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

from okvalid.newton import SolveOptions, newton_solve, parse_seed
from okvalid.operator import ModelParams
from okvalid.series import CosineSeries, k2_grid


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def make_random_series(rng, extent, zero_mean=True, scale=1.0, decay=2.0):
    a = scale * rng.standard_normal(extent)
    a = a / (1.0 + k2_grid(extent)) ** (decay / 2.0)
    if zero_mean:
        a[(0,) * len(extent)] = 0.0
    return CosineSeries.from_point(a, zero_mean=zero_mean)


def gauss_rule(n):
    """Gauss-Legendre nodes/weights on [0, 1]."""
    t, w = np.polynomial.legendre.leggauss(n)
    return (t + 1.0) / 2.0, w / 2.0


def eval_series_naive(coeffs, x):
    """Independent pointwise evaluation: direct loop, reversed mode order."""
    extent = coeffs.shape
    total = 0.0
    for flat in reversed(range(coeffs.size)):
        idx = np.unravel_index(flat, extent)
        c = coeffs[idx]
        if c == 0.0:
            continue
        term = c
        for ki, xi in zip(idx, np.atleast_1d(x)):
            term *= (math.sqrt(2.0) if ki else 1.0) * math.cos(ki * math.pi * xi)
        total += term
    return total


@pytest.fixture(scope="session")
def solved_1d():
    """The nontrivial 1-d equilibrium at (lam, sigma, mu) = (150, 6, 0), seed mode:1."""
    p = ModelParams(lam=150.0, sigma=6.0, mu=0.0)
    result = newton_solve(p, parse_seed("mode:1", 1, 128), SolveOptions(n=128))
    return p, result


@pytest.fixture(scope="session")
def certificates_1d(solved_1d):
    from okvalid.cift import validate

    p, result = solved_1d
    return {
        which: validate(p, result.solution, which)
        for which in ("lambda", "sigma", "mu")
    }
