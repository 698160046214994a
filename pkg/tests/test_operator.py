import math

import mpmath
import numpy as np
import pytest
import sympy

from conftest import gauss_rule, make_random_series
from okvalid.intervals import IntervalDomainError
from okvalid.operator import (
    CertificationError,
    ModelParams,
    apply_linearization,
    auto_inverse_bound,
    derivative_inverse_bound,
    galerkin_inverse_bound,
    galerkin_matrix,
    galerkin_matrix_point,
    linearization_coefficient,
    poly_deriv,
    residual_norm,
    residual_series,
    tau_formula,
    truncation_modes,
)
from okvalid.series import CosineSeries, evaluate


def test_model_params_validation():
    with pytest.raises(ValueError):
        ModelParams(lam=-1.0)
    with pytest.raises(ValueError):
        ModelParams(lam=1.0, sigma=-0.5)
    with pytest.raises(ValueError):
        ModelParams(lam=1.0, f_coeffs=(1.0,))
    p = ModelParams(lam=2.0)
    assert p.fp_coeffs == (1.0, 0.0, -3.0)
    assert p.fpp_coeffs == (0.0, -6.0)
    assert poly_deriv((5.0,)) == ()


# ---------------------------------------------------------------------------
# residual
# ---------------------------------------------------------------------------

def test_residual_zero_state():
    p = ModelParams(lam=7.0, sigma=2.0, mu=0.0)
    rho = residual_norm(p, CosineSeries.zeros((6,)))
    assert (rho.lo, rho.hi) == (0.0, 0.0)


def test_residual_requires_zero_mean():
    p = ModelParams(lam=1.0)
    with pytest.raises(IntervalDomainError):
        residual_norm(p, CosineSeries.from_point(np.array([1.0, 0.2])))


def test_residual_linear_f_hand_formula():
    # f(v) = v: F(eps phi_1) = eps (lam k1 - k1^2 - lam sigma) phi_1
    eps = 1e-3
    p = ModelParams(lam=1.0, sigma=1.0, mu=0.0, f_coeffs=(0.0, 1.0))
    u = CosineSeries.single_mode((4,), (1,), eps)
    f = residual_series(p, u)
    k1 = mpmath.pi**2
    expect = float(eps * (1 * k1 - k1**2 - 1 * 1))
    c = f.coefficient((1,))
    assert c.lo <= expect <= c.hi
    for k in range(f.extent[0]):
        if k != 1:
            assert f.coefficient((k,)).mag == 0.0
    assert f.coefficient((0,)).mag == 0.0


def test_residual_cubic_symbolic_oracle():
    # small-amplitude cubic case against a sympy expansion
    eps = 1e-3
    lam, sig, mu = 1.0, 1.0, 0.0
    p = ModelParams(lam=lam, sigma=sig, mu=mu)
    u = CosineSeries.single_mode((2,), (1,), eps)
    f = residual_series(p, u)

    x = sympy.symbols("x")
    ux = eps * sympy.sqrt(2) * sympy.cos(sympy.pi * x)
    fu = (ux + mu) - (ux + mu) ** 3
    expr = -sympy.diff(sympy.diff(ux, x, 2) + lam * fu, x, 2) - lam * sig * ux
    expr = sympy.expand_trig(sympy.expand(expr).rewrite(sympy.cos))
    for k in range(f.extent[0]):
        phi_k = (sympy.sqrt(2) if k else 1) * sympy.cos(k * sympy.pi * x)
        coeff = sympy.integrate(expr * phi_k, (x, 0, 1))
        val = float(sympy.nsimplify(coeff).evalf(30))
        iv = f.coefficient((k,))
        assert iv.lo - 1e-15 <= val <= iv.hi + 1e-15, (k, val, iv)


def test_residual_norm_matches_coefficients(rng):
    p = ModelParams(lam=3.0, sigma=0.5, mu=0.1)
    u = make_random_series(rng, (5,), scale=0.2)
    f = residual_series(p, u)
    rho = residual_norm(p, u)
    a = f.mid()
    expect = math.sqrt(
        sum(a[k] ** 2 / kap**2 for k in range(1, f.extent[0]) for kap in [math.pi**2 * k * k])
    )
    assert rho.lo - 1e-9 <= expect <= rho.hi + 1e-9


# ---------------------------------------------------------------------------
# the linearization coefficient q
# ---------------------------------------------------------------------------

def test_q_constant_case():
    p = ModelParams(lam=5.0, sigma=0.0, mu=0.25)
    q, q_sup, _ = linearization_coefficient(p, CosineSeries.zeros((4,)))
    expect = 5.0 * (1 - 3 * 0.25**2)
    c0 = q.coefficient((0,))
    assert c0.lo <= expect <= c0.hi
    assert all(q.coefficient((k,)).mag < 1e-14 for k in range(1, q.extent[0]))
    assert q_sup >= abs(expect)


def test_q_series_vs_quadrature(rng):
    p = ModelParams(lam=1.0, sigma=0.0, mu=0.0)
    u = CosineSeries.single_mode((2,), (1,), 1.0)
    q, q_sup, _ = linearization_coefficient(p, u)
    x, w = gauss_rule(200)
    uvals = np.array([evaluate(u, [xi]) for xi in x])
    qvals = 1.0 - 3.0 * uvals**2
    for k in range(q.extent[0]):
        phi = (math.sqrt(2.0) if k else 1.0) * np.cos(k * math.pi * x)
        quad = float(np.sum(w * qvals * phi))
        iv = q.coefficient((k,))
        assert iv.lo - 1e-12 <= quad <= iv.hi + 1e-12
    # sup bound dominates a dense grid sample
    grid = np.linspace(0, 1, 10_000)
    sample = np.max(np.abs(1.0 - 3.0 * (math.sqrt(2.0) * np.cos(math.pi * grid)) ** 2))
    assert q_sup >= sample


# ---------------------------------------------------------------------------
# Galerkin matrix
# ---------------------------------------------------------------------------

def test_truncation_modes_lex():
    m = truncation_modes(2, 3)
    assert m.shape == (8, 2)
    assert m[0].tolist() == [0, 1]
    assert m[-1].tolist() == [2, 2]


def test_galerkin_zero_q_is_minus_identity():
    p = ModelParams(lam=5.0, sigma=0.0, mu=0.0, f_coeffs=(1.0, 0.0))
    g = galerkin_matrix(p, CosineSeries.zeros((2,)), 6)
    assert np.allclose(g.mat.mid(), -np.eye(5), atol=1e-14)
    kn = galerkin_inverse_bound(g)
    assert 1.0 <= kn.value <= 1.0 + 1e-10


def test_galerkin_diagonal_hand_formula():
    lam, sig = 10.0, 1.0
    p = ModelParams(lam=lam, sigma=sig, mu=0.0)
    n = 8
    g = galerkin_matrix(p, CosineSeries.zeros((2,)), n)
    for i, k in enumerate(range(1, n)):
        kap = math.pi**2 * k * k
        expect = -(1 + lam * sig / kap**2) + lam / kap
        iv = g.mat.entry(i, i)
        assert iv.lo - 1e-12 <= expect <= iv.hi + 1e-12
    off = np.max(np.abs(g.mat.mid() - np.diag(np.diag(g.mat.mid()))))
    assert off < 1e-14


def test_galerkin_vs_quadrature_d1(rng):
    p = ModelParams(lam=2.0, sigma=1.5, mu=0.1)
    u = make_random_series(rng, (5,), scale=0.4)
    n = 6
    g = galerkin_matrix(p, u, n)
    x, w = gauss_rule(500)
    uvals = np.array([evaluate(u, [xi]) for xi in x])
    qvals = p.lam * (1.0 - 3.0 * (uvals + p.mu) ** 2)
    for i, k in enumerate(range(1, n)):
        for j, ell in enumerate(range(1, n)):
            kapk = math.pi**2 * k * k
            kapl = math.pi**2 * ell * ell
            phik = (math.sqrt(2.0)) * np.cos(k * math.pi * x)
            phil = (math.sqrt(2.0)) * np.cos(ell * math.pi * x)
            val = -(1 + p.lam * p.sigma / kapk**2) * (k == ell)
            val += float(np.sum(w * qvals * phil * phik)) / kapl
            iv = g.mat.entry(i, j)
            assert iv.lo - 1e-9 <= val <= iv.hi + 1e-9


def test_kn_diagonal_oracle():
    for lam, sig in ((10.0, 1.0), (150.0, 6.0)):
        p = ModelParams(lam=lam, sigma=sig, mu=0.0)
        for n in (32, 64):
            g = galerkin_matrix(p, CosineSeries.zeros((2,)), n)
            kn = galerkin_inverse_bound(g)
            ks = math.pi**2 * np.arange(1, n, dtype=float) ** 2
            oracle = 1.0 / np.min(np.abs(-(1 + lam * sig / ks**2) + lam / ks))
            assert oracle <= kn.value <= oracle * 1.01


def test_kn_self_consistency(rng):
    # recertify: the approximate inverse of the stored matrix keeps e < 1
    from okvalid.intervals import mat_mul, mat_sub_identity, IntervalMatrix

    p = ModelParams(lam=30.0, sigma=2.0, mu=0.0)
    u = make_random_series(rng, (6,), scale=0.3)
    g = galerkin_matrix(p, u, 12)
    kn = galerkin_inverse_bound(g)
    c = np.linalg.inv(g.mat.mid())
    e = mat_sub_identity(mat_mul(IntervalMatrix.from_point(c), g.mat))
    assert e.norm2_upper() < 1.0
    assert kn.defect < 1.0


# ---------------------------------------------------------------------------
# inverse bound
# ---------------------------------------------------------------------------

def test_tau_zero_when_q_zero():
    p = ModelParams(lam=5.0, sigma=0.0, mu=0.0, f_coeffs=(1.0, 0.0))
    ib = derivative_inverse_bound(p, CosineSeries.zeros((2,)), 8)
    assert ib.tau == 0.0
    assert ib.k == pytest.approx(max(ib.kn, 1.0), rel=1e-12)


def test_inverse_bound_diagonal_case():
    p = ModelParams(lam=150.0, sigma=6.0, mu=0.0)
    u = CosineSeries.zeros((2,))
    ib = derivative_inverse_bound(p, u, 64)
    ks = math.pi**2 * np.arange(1, 64, dtype=float) ** 2
    kn_oracle = 1.0 / np.min(np.abs(-(1 + 150.0 * 6.0 / ks**2) + 150.0 / ks))
    k_expected = max(kn_oracle, 1.0) / (1.0 - ib.tau)
    assert ib.k == pytest.approx(k_expected, rel=1e-2)
    assert ib.tau < 1.0


def test_tau_quarters_when_n_doubles():
    p = ModelParams(lam=150.0, sigma=6.0, mu=0.0)
    u = CosineSeries.zeros((2,))
    t1 = derivative_inverse_bound(p, u, 32).tau
    t2 = derivative_inverse_bound(p, u, 64).tau
    assert t2 <= t1 / 3.5


def test_tau_formula_against_mpmath(rng):
    for _ in range(50):
        kn = float(10 ** rng.uniform(-1, 2))
        qs = float(10 ** rng.uniform(-1, 3))
        qh = float(10 ** rng.uniform(-1, 4))
        cb = 1.471443
        n = int(rng.integers(2, 200))
        mine = tau_formula(kn, qs, qh, cb, n)
        pi = mpmath.pi
        ref = (
            mpmath.sqrt(kn**2 * qs**2 + cb**2 * (1 + pi**4) / pi**4 * qh**2)
            / (pi**2 * n**2)
        )
        assert mine.lo <= float(ref) <= mine.hi
        assert mine.width <= 1e-10 * mine.hi


def test_inverse_bound_raises_when_tau_large(solved_1d):
    p, result = solved_1d
    with pytest.raises(CertificationError) as err:
        derivative_inverse_bound(p, result.solution, 8)
    assert err.value.stage == "inverse_bound"
    assert err.value.suggested_n is not None and err.value.suggested_n > 8


def test_auto_inverse_bound(solved_1d):
    p, result = solved_1d
    ib = auto_inverse_bound(p, result.solution)
    assert ib.tau <= 0.5
    assert ib.n <= 160


# ---------------------------------------------------------------------------
# the linearization as an operator
# ---------------------------------------------------------------------------

def test_apply_linearization_vs_finite_difference(rng):
    p = ModelParams(lam=4.0, sigma=1.0, mu=0.1)
    u = make_random_series(rng, (5,), scale=0.3)
    v = make_random_series(rng, (5,), scale=1.0)
    lv = apply_linearization(p, u, v)
    h = 1e-6
    up = CosineSeries.from_point(u.mid() + h * v.mid(), zero_mean=True)
    um = CosineSeries.from_point(u.mid() - h * v.mid(), zero_mean=True)
    diff = (residual_series(p, up).mid() - residual_series(p, um).mid()) / (2 * h)
    lv_mid = lv.mid()[: diff.shape[0]]
    scale = max(1.0, float(np.max(np.abs(lv_mid))))
    assert np.max(np.abs(lv_mid - diff[: lv_mid.shape[0]])) / scale < 1e-7


def test_linearization_zero_mean_output(rng):
    p = ModelParams(lam=4.0, sigma=1.0, mu=0.1)
    u = make_random_series(rng, (5,), scale=0.3)
    v = make_random_series(rng, (6,), scale=1.0)
    lv = apply_linearization(p, u, v)
    assert lv.zero_mean and lv.coefficient((0,)).mag == 0.0
    f = residual_series(p, u)
    assert f.zero_mean and f.coefficient((0,)).mag == 0.0


def test_point_jacobian_matches_interval_matrix(rng):
    p = ModelParams(lam=20.0, sigma=2.0, mu=0.1)
    a = np.zeros((5, 5))
    a[0, 1], a[1, 0], a[2, 2] = 0.2, -0.15, 0.05
    u = CosineSeries.from_point(a, zero_mean=True)
    b = galerkin_matrix_point(p, a, 5)
    g = galerkin_matrix(p, u, 5)
    modes = truncation_modes(2, 5)
    kap = math.pi**2 * np.sum(modes.astype(float) ** 2, axis=1)
    scaled = b / kap[:, None] / kap[None, :]
    assert np.max(np.abs(scaled - g.mat.mid())) < 1e-13
