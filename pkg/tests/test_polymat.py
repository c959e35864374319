import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from singcoint.exceptions import DegenerateResultant, NotZeroless, RankDeficientAtZero, ShapeError
from singcoint.polymat import (
    PolyMatrix,
    Polynomial,
    bn_split,
    det_poly,
    det_roots,
    hstack,
    is_stable,
    is_zeroless,
    left_inverse,
    left_inverse_null_directions,
    coefficients_block,
    from_coefficients_block,
    monic_resultant,
    multiply,
    poly_roots,
    resultant,
    sylvester_matrix,
    vstack,
)


def poly_strategy(rows, cols, max_deg=3):
    return st.integers(0, max_deg).flatmap(
        lambda d: st.lists(st.floats(-2, 2, allow_nan=False), min_size=(d + 1) * rows * cols,
                           max_size=(d + 1) * rows * cols).map(
            lambda v: PolyMatrix(np.array(v).reshape(d + 1, rows, cols))))


def test_trailing_zero_coefficients_are_dropped():
    P = PolyMatrix(np.array([[[1.0]], [[2.0]], [[0.0]]]))
    assert P.degree == 1
    assert PolyMatrix.zeros(2, 3).degree == 0


def test_constant_matrix_and_identity():
    P = PolyMatrix(np.eye(2))
    assert P.shape == (2, 2) and P.degree == 0
    assert np.array_equal(PolyMatrix.identity(3).at_one(), np.eye(3))


def test_one_minus_lag_powers():
    assert np.allclose(PolyMatrix.one_minus_lag(1, 2).coeffs[:, 0, 0], [1, -2, 1])


def test_product_shape_mismatch():
    with pytest.raises(ShapeError):
        multiply(PolyMatrix.identity(2), PolyMatrix.identity(3))


@settings(max_examples=40, deadline=None)
@given(poly_strategy(2, 3), poly_strategy(3, 2), st.floats(-1.5, 1.5))
def test_product_evaluates_pointwise(P, Q, z):
    assert np.allclose((P @ Q).eval(z), P.eval(z) @ Q.eval(z), atol=1e-9)


@settings(max_examples=30, deadline=None)
@given(poly_strategy(2, 2), poly_strategy(2, 2), poly_strategy(2, 2))
def test_product_associative(P, Q, R):
    assert ((P @ Q) @ R).max_abs_diff(P @ (Q @ R)) < 1e-9


def test_matrix_times_polymatrix():
    P = PolyMatrix(np.arange(8.0).reshape(2, 2, 2))
    A = np.array([[1.0, 2.0], [0.0, 1.0]])
    assert np.allclose((A @ P).coeffs, A @ P.coeffs)
    assert np.allclose((P @ A).coeffs, P.coeffs @ A)


def test_stack_helpers():
    P = PolyMatrix(np.ones((2, 1, 1)))
    V = vstack([P, P.shift(1)])
    assert V.shape == (2, 1) and V.degree == 2
    assert hstack([P, P]).shape == (1, 2)


@settings(max_examples=30, deadline=None)
@given(poly_strategy(2, 2))
def test_bn_split_identities(P):
    P1, Pstar = bn_split(P, "at-one")
    diff = PolyMatrix.one_minus_lag(2) @ Pstar
    assert (diff + PolyMatrix(P1)).max_abs_diff(P) < 1e-10
    P1, Pstar = bn_split(P, "lagged")
    rebuilt = PolyMatrix.one_minus_lag(2) @ Pstar + PolyMatrix(P1).shift(1)
    assert rebuilt.max_abs_diff(P) < 1e-10


def test_det_of_difference_operator():
    p = det_poly(PolyMatrix.one_minus_lag(2))
    assert np.allclose(p.coeffs, [1, -2, 1])


def test_det_of_diagonal():
    P = PolyMatrix(np.array([np.eye(2), np.diag([-0.5, 0.25])]))
    assert np.allclose(det_poly(P).coeffs, [1, -0.25, -0.125])


def test_det_roots_match_scalar_roots():
    rng = np.random.default_rng(3)
    P = PolyMatrix(np.concatenate([np.eye(3)[None], 0.4 * rng.standard_normal((2, 3, 3))]))
    a = np.sort_complex(det_roots(P))
    b = np.sort_complex(poly_roots(det_poly(P)))
    assert a.size == b.size == 6
    assert np.allclose(a, b, atol=1e-8)


def test_stability():
    assert is_stable(PolyMatrix(np.array([np.eye(2), -0.5 * np.eye(2)])))
    assert not is_stable(PolyMatrix.one_minus_lag(2))


def test_resultant_known_values():
    # (z - 2) and (z - 3): prod(alpha - beta) = -1
    assert resultant(Polynomial([-2, 1]), Polynomial([-3, 1])) == pytest.approx(-1.0)
    # shared root
    a = Polynomial.from_roots([1.0, 2.0])
    b = Polynomial.from_roots([2.0, -1.0])
    assert abs(resultant(a, b)) < 1e-12
    # constants
    assert resultant(Polynomial([3.0]), Polynomial([5.0])) == 1.0
    assert sylvester_matrix(a, b).shape == (4, 4)


def test_resultant_scaling_with_leading_coefficients():
    a = Polynomial.from_roots([0.5], 2.0)
    b = Polynomial.from_roots([-1.0, 1.0], 3.0)
    # a_0^m b_0^n prod = 2^2 * 3^1 * (0.5+1)(0.5-1)
    assert resultant(a, b) == pytest.approx(4 * 3 * (1.5 * -0.5))
    assert monic_resultant(a, b) == pytest.approx(1.5 * -0.5)


def test_resultant_of_zero_polynomial_is_undefined():
    with pytest.raises(DegenerateResultant):
        resultant(Polynomial([0.0]), Polynomial([1.0, 1.0]))


grid = st.lists(st.sampled_from([-1.0, -0.5, 0.0, 0.5, 1.0]), min_size=1, max_size=3)


@settings(max_examples=100, deadline=None)
@given(grid, grid)
def test_resultant_vanishes_iff_common_root(ra, rb):
    a, b = Polynomial.from_roots(ra), Polynomial.from_roots(rb)
    shared = bool(set(ra) & set(rb))
    assert (abs(monic_resultant(a, b)) < 1e-8) == shared
    m, n = a.degree, b.degree
    assert resultant(a, b) == pytest.approx((-1) ** (m * n) * resultant(b, a), abs=1e-10)


def test_zeroless_detection():
    M = PolyMatrix(np.array([[[1.0], [0.0]], [[-1.0], [1.0]], [[0.0], [-1.0]]]))  # [1 - L; L - L^2]
    cert = is_zeroless(M)
    assert not cert
    assert cert.zero == pytest.approx(1.0)
    assert cert.rank_at_zero == 0
    good = PolyMatrix(np.array([[[1.0], [0.0]], [[0.0], [1.0]]]))  # [1; L]
    assert is_zeroless(good)


def test_zeroless_requires_tall():
    with pytest.raises(ShapeError):
        is_zeroless(PolyMatrix.identity(2))


def test_left_inverse_two_variable_example():
    M = PolyMatrix(np.array([[[1.0], [1.0]], [[0.5], [-0.5]]]))
    N = left_inverse(M)
    assert N.degree == 1
    assert (N @ M).max_abs_diff(PolyMatrix(M.coeffs[0])) < 1e-12
    assert np.allclose(-N.coeffs[1], [[0.25, 0.25], [-0.25, -0.25]], atol=1e-12)
    assert is_stable(N)


def test_left_inverse_rejects_non_zeroless():
    M = PolyMatrix(np.array([[[1.0], [0.0]], [[-1.0], [1.0]], [[0.0], [-1.0]]]))
    with pytest.raises(NotZeroless) as info:
        left_inverse(M)
    assert info.value.certificate is not None


def test_left_inverse_rank_deficient_at_zero():
    M = PolyMatrix(np.array([[[0.0], [0.0]], [[1.0], [2.0]]]))
    with pytest.raises(RankDeficientAtZero):
        left_inverse(M)


def test_null_directions_give_other_left_inverses():
    M = PolyMatrix(np.array([[[1.0], [1.0], [1.0]], [[0.5], [-0.5], [0.2]]]))
    N = left_inverse(M)
    W = left_inverse_null_directions(M, N.degree)
    assert W.shape[0] >= 1
    X = coefficients_block(N) + np.outer([0.1, -0.2, 0.05], W[0])
    N2 = from_coefficients_block(X)
    assert (N2 @ M).max_abs_diff(PolyMatrix(M.coeffs[0])) < 1e-12
    assert N2.max_abs_diff(N) > 1e-3


def test_json_round_trip():
    P = PolyMatrix(np.arange(12.0).reshape(3, 2, 2))
    assert PolyMatrix.from_json(P.to_json()).max_abs_diff(P) == 0.0


def test_zero_found_at_inexact_root():
    # [1 + 0.3L; 2 + 0.6L] vanishes at z = -1/0.3, which is not exactly representable
    M = PolyMatrix(np.array([[[1.0], [2.0]], [[0.3], [0.6]]]))
    cert = is_zeroless(M)
    assert not cert and cert.zero == pytest.approx(-1 / 0.3)
    assert not is_zeroless(PolyMatrix(np.array([[[1.0], [1.0]], [[-1.0], [-1.0]]])))
