import warnings

import numpy as np
import pytest

from singcoint.estimate import (
    VarEstimate,
    fit_estimator,
    identify_shocks,
    irf_from_estimate,
    johansen_vecm,
    levels_to_vecm,
    ols_var,
    principal_angles,
    vecm_to_levels,
)
from singcoint.exceptions import EstimationWarning, InsufficientData
from singcoint.model import levels_irf
from singcoint.simulate import dgp_to_spec, draw_dgp, make_rng, simulate_factors


@pytest.fixture(scope="module")
def dgp():
    draw = draw_dgp(0)
    spec, rep = dgp_to_spec(draw)
    return draw, spec, rep


@pytest.fixture(scope="module")
def long_path(dgp):
    draw, _, _ = dgp
    return simulate_factors(draw, 100_000, seed=0, stream=9)


def test_noiseless_var1_recovered():
    B = np.array([[0.5, 0.2], [-0.1, 0.3]])
    Y = np.zeros((40, 2))
    Y[0] = [1.0, -2.0]
    for t in range(1, 40):
        Y[t] = B @ Y[t - 1]
    est = ols_var(Y, 1)
    assert np.allclose(est.coeffs[0], B, atol=1e-8)
    assert np.allclose(est.intercept, 0.0, atol=1e-8)


def test_too_many_lags():
    with pytest.raises(InsufficientData):
        ols_var(np.zeros((20, 4)), 4)
    with pytest.raises(InsufficientData):
        johansen_vecm(np.zeros((10, 4)), 2, 3)


def test_normal_equations(dgp):
    draw, _, _ = dgp
    F = simulate_factors(draw, 300, seed=2).F
    for kind in ("levels", "differences"):
        est = ols_var(F, 2, kind)
        Z = np.diff(F, axis=0) if kind == "differences" else F
        X = np.hstack([np.ones((Z.shape[0] - 2, 1)), Z[1:-1], Z[:-2]])
        scale = np.linalg.norm(X) * np.linalg.norm(est.residuals)
        assert np.max(np.abs(X.T @ est.residuals)) <= 1e-8 * scale
        assert est.coeffs.shape == (2, 4, 4)


def test_dvar_residual_variance_exceeds_vecm(dgp):
    draw, _, _ = dgp
    gaps = []
    for rep in range(10):
        F = simulate_factors(draw, 500, seed=1, stream=rep).F
        gaps.append(np.trace(ols_var(F, 2, "differences").sigma) - np.trace(johansen_vecm(F, 2, 3).sigma))
    assert np.mean(gaps) > 0


def test_johansen_eigenvalues_sorted_in_unit_interval(dgp):
    draw, _, _ = dgp
    F = simulate_factors(draw, 500, seed=3).F
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", EstimationWarning)
        est = johansen_vecm(F, 2, 3)
    lam = est.eigenvalues
    assert np.all(np.diff(lam) <= 0) and np.all(lam >= 0) and np.all(lam < 1)
    assert np.allclose(est.beta_hat.T @ est.beta_hat, np.eye(3))
    assert np.linalg.matrix_rank(est.Pi) == 3


def test_johansen_on_random_walks_finds_no_signal():
    e = make_rng(5, 0).standard_normal((1000, 2))
    Y = np.cumsum(e, axis=0)
    est = johansen_vecm(Y, 1, 1)
    assert est.eigenvalues[0] < 0.05


def test_johansen_large_sample_angle(dgp, long_path):
    _, _, rep = dgp
    est = johansen_vecm(long_path.F, 2, 3)
    assert np.max(principal_angles(est.beta_hat, rep.beta)) < 0.01
    assert np.linalg.norm(est.Pi - rep.A.at_one()) < 0.1


def test_identity_normalisation(dgp, long_path):
    est = johansen_vecm(long_path.F[:5000], 2, 3, beta_norm="identity")
    assert np.allclose(est.beta_hat[:3], np.eye(3))
    ortho = johansen_vecm(long_path.F[:5000], 2, 3)
    assert np.allclose(est.Pi, ortho.Pi, atol=1e-8)


def test_constant_term(dgp):
    draw, _, _ = dgp
    F = simulate_factors(draw, 400, seed=6).F + 5.0
    est = johansen_vecm(F, 2, 3, det_spec="const")
    assert est.intercept.shape == (4,)


def test_vecm_levels_round_trip():
    rng = make_rng(7, 0)
    for P in (1, 2, 4):
        B = 0.3 * rng.standard_normal((P, 3, 3))
        Pi, gammas = levels_to_vecm(B)
        assert gammas.shape == (P - 1, 3, 3)
        assert np.max(np.abs(vecm_to_levels(Pi, gammas) - B)) < 1e-12


def test_true_vecm_parameters_reproduce_theoretical_irf(dgp):
    draw, _, rep = dgp
    B = np.stack([draw.A1, draw.A2])
    Pi, gammas = levels_to_vecm(B)
    assert np.allclose(Pi, rep.A.at_one(), atol=1e-14)
    est = VarEstimate("levels", 2, vecm_to_levels(Pi, gammas), np.zeros(4), np.zeros((0, 4)), np.eye(4))
    irf = irf_from_estimate(est, draw.C0, 80)
    truth = levels_irf(draw.A, draw.C0, 80)
    assert np.max(np.abs(irf.level_coeffs - truth.level_coeffs)) < 1e-10


def test_identification_recovers_impact_matrix(dgp):
    draw, _, _ = dgp
    ident = identify_shocks(draw.C0 @ draw.C0.T, 3)
    assert np.max(np.abs(ident.R_hat - draw.C0)) < 1e-8
    assert np.allclose(ident.rotation.T @ ident.rotation, np.eye(3))


def test_identification_reduces_to_cholesky():
    rng = make_rng(8, 0)
    X = rng.standard_normal((3, 3))
    sigma = X @ X.T + np.eye(3)
    ident = identify_shocks(sigma, 3)
    assert np.allclose(ident.R_hat, np.linalg.cholesky(sigma))
    assert np.allclose(identify_shocks(np.eye(3), 3).R_hat, np.eye(3))


def test_identification_scaling_and_signs():
    rng = make_rng(9, 0)
    X = rng.standard_normal((5, 3))
    sigma = X @ X.T + 1e-3 * np.eye(5)
    a = identify_shocks(sigma, 3)
    b = identify_shocks(4.0 * sigma, 3)
    assert np.allclose(b.R_hat, 2.0 * a.R_hat)
    assert np.allclose(b.rotation, a.rotation)
    upper = a.R_hat[:3]
    assert np.all(np.diag(upper) >= 0) and np.allclose(np.triu(upper, 1), 0)


def test_identification_rank_warning():
    with pytest.warns(EstimationWarning):
        identify_shocks(np.diag([1.0, 1.0, 0.0, 0.0]), 3)


def test_impact_response_equals_r_hat(dgp):
    draw, _, _ = dgp
    F = simulate_factors(draw, 400, seed=10).F
    for est in (ols_var(F, 2, "levels"), ols_var(F, 2, "differences"), johansen_vecm(F, 2, 3)):
        ident = identify_shocks(est.sigma, 3)
        irf = irf_from_estimate(est, ident, 10)
        assert np.allclose(irf.level_coeffs[0], ident.R_hat)
    with pytest.raises(ValueError):
        irf_from_estimate(est, ident, -1)


def test_lvar_and_vecm_agree_on_long_path(long_path):
    F = long_path.F
    irfs = [fit_estimator(name, F, 3, 3, 2, 20) for name in ("LVAR", "VECM")]
    assert np.max(np.abs(irfs[0].level_coeffs - irfs[1].level_coeffs)) <= 0.01


def test_unknown_estimator():
    with pytest.raises(ValueError):
        fit_estimator("BVAR", np.zeros((50, 4)), 3, 3, 2, 5)
