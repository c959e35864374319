"""Acceptance suite: one test per acceptance criterion, each printing a PASS/FAIL line."""

import pytest

from singcoint import verify


@pytest.fixture
def report(capsys):
    def _report(result):
        with capsys.disabled():
            print(f"\n{result.line()}")
        return result

    return _report


def test_criterion_01_left_inverse_identity(report):
    res = report(verify.check_left_inverse(n=100))
    assert res.passed, res.detail


def test_criterion_02_two_variable_left_inverse_oracle(report):
    res = report(verify.check_two_variable_oracle(a=0.5, b=-0.5))
    assert res.passed, res.detail


def test_criterion_03_cointegration_annihilation(report):
    res = report(verify.check_annihilation(n=100, H=200))
    assert res.passed, res.detail


def test_criterion_04_permanent_transitory_reconstruction(report):
    res = report(verify.check_pt_reconstruction(T=1000))
    assert res.passed, res.detail


def test_criterion_05_vecm_recursion(report):
    res = report(verify.check_recursion())
    assert res.passed, res.detail


def test_criterion_06_irf_representation_invariance(report):
    res = report(verify.check_irf_invariance(H=50))
    assert res.passed, res.detail


def test_criterion_07_johansen_consistency(report):
    res = report(verify.check_johansen(T=10000))
    assert res.passed, res.detail


def test_criterion_08_monte_carlo_pattern(report):
    res = report(verify.check_mc_pattern(replications=200))
    assert res.passed, res.detail


def test_criterion_09_subvector_cointegration_predictor(report):
    res = report(verify.check_subvector_predictor(n=100))
    assert res.passed, res.detail


def test_criterion_10_resultant_common_roots(report):
    res = report(verify.check_resultant(n=500))
    assert res.passed, res.detail
