import dataclasses

import numpy as np
import pytest

from okvalid.cift import (
    Certificate,
    feasible_dx_range,
    solve_radii,
    validate,
    verify_certificate,
)
from okvalid.operator import CertificationError, ModelParams
from okvalid.series import CosineSeries


# ---------------------------------------------------------------------------
# solve_radii
# ---------------------------------------------------------------------------

def test_radii_hand_solution():
    r = solve_radii(k=1.0, rho=0.0, l1=1.0, l2=0.0, l3=0.0, l4=0.0,
                    ell_x=1.0, ell_alpha=1.0)
    assert r.delta_alpha == 1.0  # capped by ell_alpha
    assert r.delta_x == 0.0  # accuracy radius collapses when rho = 0
    assert r.delta_x_sup == pytest.approx(0.5, rel=1e-12)  # uniqueness reach
    assert not r.point_only and r.infeasible_witness is None


def test_radii_precondition_residual():
    with pytest.raises(CertificationError):
        solve_radii(k=1.0, rho=0.3, l1=1.0, l2=0.0, l3=0.0, l4=0.0,
                    ell_x=10.0, ell_alpha=1.0)


def test_radii_precondition_box():
    with pytest.raises(CertificationError):
        solve_radii(k=1.0, rho=0.6, l1=0.01, l2=0.0, l3=0.0, l4=0.0,
                    ell_x=1.0, ell_alpha=1.0)


def test_radii_closed_form_crossing():
    # g = 0.04 + 2 da, budget = 4(dx + da) <= 1  =>  da* = 0.07, dx* = 0.18
    r = solve_radii(k=2.0, rho=0.01, l1=1.0, l2=1.0, l3=0.5, l4=0.0,
                    ell_x=10.0, ell_alpha=10.0)
    assert r.delta_alpha == pytest.approx(0.07, rel=1e-9)
    assert r.delta_x == pytest.approx(0.18, rel=1e-9)
    assert r.infeasible_witness is not None
    assert r.infeasible_witness <= r.delta_alpha * (1 + 1e-6)


def test_radii_maximality_witness():
    r = solve_radii(k=2.0, rho=0.01, l1=1.0, l2=1.0, l3=0.5, l4=0.1,
                    ell_x=10.0, ell_alpha=10.0)
    # plugging the radii back in satisfies both inequalities
    from okvalid.cift import derivative_budget, radius_requirement

    assert radius_requirement(2.0, 0.01, 0.5, 0.1, r.delta_alpha).hi <= r.delta_x
    assert derivative_budget(2.0, 1.0, 1.0, r.delta_alpha, r.delta_x).hi <= 1.0
    # and the witness is infeasible
    dx_w = radius_requirement(2.0, 0.01, 0.5, 0.1, r.infeasible_witness).hi
    assert (dx_w > 10.0) or derivative_budget(2.0, 1.0, 1.0, r.infeasible_witness, dx_w).hi > 1.0


def test_radii_point_only():
    r = solve_radii(k=1.0, rho=0.0, l1=1.0, l2=1e30, l3=0.0, l4=0.0,
                    ell_x=1.0, ell_alpha=1.0)
    assert r.delta_alpha == 0.0 and r.point_only


def test_feasible_dx_range():
    rng_pair = feasible_dx_range(1.0, 0.0, 1.0, 0.0, 0.0, 0.0, ell_x=1.0, da=0.0)
    assert rng_pair is not None
    lo, hi = rng_pair
    assert lo == 0.0 and hi == pytest.approx(0.5, rel=1e-12)
    assert feasible_dx_range(1.0, 0.4, 1.0, 0.0, 0.0, 0.0, ell_x=1.0, da=0.0) is None


# ---------------------------------------------------------------------------
# validate on the trivial state
# ---------------------------------------------------------------------------

def test_validate_trivial_state_small_lambda():
    p = ModelParams(lam=5.0, sigma=1.0, mu=0.0)
    u = CosineSeries.zeros((2,))
    cert = validate(p, u, "lambda")
    assert cert.valid and cert.stage == "complete"
    assert cert.rho == 0.0
    assert cert.delta_alpha > 0.0
    ok, failures = verify_certificate(cert)
    assert ok, failures


def test_validate_rejects_nonzero_mean():
    p = ModelParams(lam=5.0)
    u = CosineSeries.from_point(np.array([0.1, 0.2]))
    cert = validate(p, u, "lambda")
    assert not cert.valid and cert.stage == "input"


def test_validate_unknown_param():
    p = ModelParams(lam=5.0)
    with pytest.raises(ValueError):
        validate(p, CosineSeries.zeros((2,)), "nu")


def test_validate_pinned_box():
    p = ModelParams(lam=5.0, sigma=1.0, mu=0.0)
    u = CosineSeries.zeros((2,))
    cert = validate(p, u, "sigma", du=0.25, dp=0.125)
    assert cert.valid
    assert cert.ell_x == 0.25 and cert.ell_alpha == 0.125
    assert cert.delta_x <= 0.25 and cert.delta_alpha <= 0.125


def test_validate_small_truncation_fails_cleanly(solved_1d):
    p, result = solved_1d
    cert = validate(p, result.solution, "lambda", n=8)
    assert not cert.valid
    assert cert.stage == "inverse_bound"
    assert "increase the truncation" in cert.reason


def test_verify_rejects_tampering():
    p = ModelParams(lam=5.0, sigma=1.0, mu=0.0)
    cert = validate(p, CosineSeries.zeros((2,)), "lambda")
    assert verify_certificate(cert)[0]
    tampered = dataclasses.replace(cert, delta_alpha=cert.delta_alpha * 1.1)
    ok, failures = verify_certificate(tampered)
    assert not ok and failures


def test_verify_rejects_invalid_or_incomplete():
    p = ModelParams(lam=5.0)
    bad = Certificate(params=p, which="lambda", valid=False, stage="residual")
    assert not verify_certificate(bad)[0]
    sparse = Certificate(params=p, which="lambda", valid=True, stage="complete")
    ok, failures = verify_certificate(sparse)
    assert not ok and "missing fields" in failures[0]


def test_validate_nontrivial_certificates(certificates_1d):
    for which, cert in certificates_1d.items():
        assert cert.valid, (which, cert.stage, cert.reason)
        assert verify_certificate(cert)[0]
        assert cert.tau < 1.0
        assert cert.delta_alpha > 0.0 and cert.delta_x > 0.0
        assert cert.delta_x <= cert.ell_x and cert.delta_alpha <= cert.ell_alpha
