"""
Finite matrix polynomials in the lag operator.

A :class:`PolyMatrix` stores ``P(L) = P_0 + P_1 L + ... + P_s L^s`` as an array of
shape ``(s + 1, rows, cols)``, coefficient of ``L^0`` first. The JSON form used
throughout the package is the nested list ``coeffs[k][i][j]``.

Besides the ring operations the module provides the pieces needed to certify
that a tall polynomial matrix is zeroless and to compute a finite-degree
stable left inverse ``N(L)`` with ``N(L) M(L) = M(0)``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from singcoint.exceptions import (
    DegenerateResultant,
    NoStableInverseWithinDegree,
    NotZeroless,
    RankDeficientAtZero,
    ShapeError,
)

__all__ = [
    "PolyMatrix",
    "Polynomial",
    "ZerolessCertificate",
    "bn_split",
    "det_poly",
    "det_roots",
    "is_stable",
    "is_zeroless",
    "left_inverse",
    "multiply",
    "numerical_rank",
    "poly_roots",
    "resultant",
]

RANK_TOL = 1e-10
ROOT_CLUSTER = 1e-7


def _freeze(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


class PolyMatrix:
    """Real matrix polynomial ``sum_k coeffs[k] L^k``.

    Parameters
    ----------
    coeffs : array_like
        Either a 3-d array ``(degree + 1, rows, cols)`` or a sequence of
        equally shaped 2-d matrices. A single 2-d matrix is read as a
        constant polynomial.
    """

    __slots__ = ("_c",)
    # make ``ndarray @ PolyMatrix`` dispatch to __rmatmul__
    __array_ufunc__ = None

    def __init__(self, coeffs):
        if isinstance(coeffs, PolyMatrix):
            coeffs = coeffs.coeffs
        c = np.array(coeffs, dtype=float)
        if c.ndim == 2:
            c = c[None, :, :]
        if c.ndim != 3 or c.shape[0] == 0:
            raise ShapeError(f"coefficients must have shape (k, rows, cols), got {c.shape}")
        if c.shape[1] == 0 or c.shape[2] == 0:
            raise ShapeError("rows and cols must be positive")
        last = c.shape[0]
        while last > 1 and not np.any(c[last - 1]):
            last -= 1
        self._c = _freeze(c[:last].copy())

    # constructors -----------------------------------------------------
    @classmethod
    def identity(cls, n: int) -> "PolyMatrix":
        return cls(np.eye(n))

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "PolyMatrix":
        return cls(np.zeros((rows, cols)))

    @classmethod
    def one_minus_lag(cls, n: int, power: int = 1) -> "PolyMatrix":
        """``(1 - L)^power I_n``."""
        scalar = np.array([(-1.0) ** k * math.comb(power, k) for k in range(power + 1)])
        return cls(scalar[:, None, None] * np.eye(n)[None])

    @classmethod
    def from_json(cls, obj) -> "PolyMatrix":
        return cls(np.asarray(obj, dtype=float))

    # basic attributes -------------------------------------------------
    @property
    def coeffs(self) -> np.ndarray:
        return self._c

    @property
    def rows(self) -> int:
        return self._c.shape[1]

    @property
    def cols(self) -> int:
        return self._c.shape[2]

    @property
    def shape(self) -> Tuple[int, int]:
        return self._c.shape[1], self._c.shape[2]

    @property
    def degree(self) -> int:
        return self._c.shape[0] - 1

    def coeff(self, k: int) -> np.ndarray:
        if 0 <= k <= self.degree:
            return self._c[k]
        return np.zeros(self.shape)

    def to_json(self) -> list:
        return self._c.tolist()

    def __repr__(self) -> str:
        return f"PolyMatrix(shape={self.shape}, degree={self.degree})"

    # algebra ------------------------------------------------------------
    def __call__(self, z):
        return self.eval(z)

    def eval(self, z) -> np.ndarray:
        out = np.zeros(self.shape, dtype=np.result_type(self._c, z))
        for ck in self._c[::-1]:
            out = out * z + ck
        return out

    def at_one(self) -> np.ndarray:
        return self._c.sum(axis=0)

    def __matmul__(self, other):
        if isinstance(other, PolyMatrix):
            return multiply(self, other)
        other = np.asarray(other, dtype=float)
        if other.ndim == 1:
            other = other[:, None]
        if other.shape[0] != self.cols:
            raise ShapeError(f"cannot multiply {self.shape} by {other.shape}")
        return PolyMatrix(self._c @ other)

    def __rmatmul__(self, other):
        other = np.asarray(other, dtype=float)
        if other.ndim == 1:
            other = other[None, :]
        if other.shape[1] != self.rows:
            raise ShapeError(f"cannot multiply {other.shape} by {self.shape}")
        return PolyMatrix(other @ self._c)

    def _aligned(self, other: "PolyMatrix"):
        if self.shape != other.shape:
            raise ShapeError(f"shape mismatch {self.shape} vs {other.shape}")
        n = max(self.degree, other.degree) + 1
        a = np.zeros((n,) + self.shape)
        b = np.zeros((n,) + self.shape)
        a[: self.degree + 1] = self._c
        b[: other.degree + 1] = other._c
        return a, b

    def __add__(self, other):
        if not isinstance(other, PolyMatrix):
            other = PolyMatrix(other)
        a, b = self._aligned(other)
        return PolyMatrix(a + b)

    def __sub__(self, other):
        if not isinstance(other, PolyMatrix):
            other = PolyMatrix(other)
        a, b = self._aligned(other)
        return PolyMatrix(a - b)

    def __neg__(self):
        return PolyMatrix(-self._c)

    def __mul__(self, scalar):
        return PolyMatrix(self._c * float(scalar))

    __rmul__ = __mul__

    @property
    def T(self) -> "PolyMatrix":
        return PolyMatrix(np.transpose(self._c, (0, 2, 1)))

    def shift(self, k: int = 1) -> "PolyMatrix":
        """Multiply by ``L^k``."""
        pad = np.zeros((k,) + self.shape)
        return PolyMatrix(np.concatenate([pad, self._c]))

    def truncated(self, tol: float) -> "PolyMatrix":
        """Drop trailing coefficients whose entries are all below ``tol``."""
        last = self.degree + 1
        while last > 1 and np.max(np.abs(self._c[last - 1])) <= tol:
            last -= 1
        return PolyMatrix(self._c[:last])

    def max_abs_diff(self, other) -> float:
        if not isinstance(other, PolyMatrix):
            other = PolyMatrix(other)
        a, b = self._aligned(other)
        return float(np.max(np.abs(a - b)))

    def select_rows(self, idx) -> "PolyMatrix":
        return PolyMatrix(self._c[:, list(idx), :])

    def select_cols(self, idx) -> "PolyMatrix":
        return PolyMatrix(self._c[:, :, list(idx)])


def vstack(blocks: Sequence[PolyMatrix]) -> PolyMatrix:
    n = max(b.degree for b in blocks) + 1
    parts = [np.concatenate([b.coeffs, np.zeros((n - b.degree - 1,) + b.shape)]) for b in blocks]
    return PolyMatrix(np.concatenate(parts, axis=1))


def hstack(blocks: Sequence[PolyMatrix]) -> PolyMatrix:
    n = max(b.degree for b in blocks) + 1
    parts = [np.concatenate([b.coeffs, np.zeros((n - b.degree - 1,) + b.shape)]) for b in blocks]
    return PolyMatrix(np.concatenate(parts, axis=2))


def multiply(P: PolyMatrix, Q: PolyMatrix) -> PolyMatrix:
    """Coefficient-wise convolution ``P(L) Q(L)``."""
    if P.cols != Q.rows:
        raise ShapeError(f"cannot multiply {P.shape} by {Q.shape}")
    out = np.zeros((P.degree + Q.degree + 1, P.rows, Q.cols))
    for i, Pi in enumerate(P.coeffs):
        out[i : i + Q.degree + 1] += np.einsum("ij,kjl->kil", Pi, Q.coeffs)
    return PolyMatrix(out)


def _cumulative_quotient(R: np.ndarray) -> np.ndarray:
    """Coefficients of ``R(L) / (1 - L)`` for ``R`` with ``R(1) = 0``."""
    q = np.cumsum(R, axis=0)[:-1]
    if q.shape[0] == 0:
        q = np.zeros((1,) + R.shape[1:])
    return q


def bn_split(P: PolyMatrix, mode: str = "at-one") -> Tuple[np.ndarray, PolyMatrix]:
    """Beveridge-Nelson style split of a matrix polynomial.

    ``mode="at-one"`` returns ``(P(1), P*)`` with ``P(L) = P(1) + (1 - L) P*(L)``.
    ``mode="lagged"`` returns ``(P(1), P*)`` with ``P(L) = P(1) L + (1 - L) P*(L)``,
    the form used to write a levels autoregression as an error-correction model.
    """
    P1 = P.at_one()
    c = P.coeffs
    if mode == "at-one":
        R = c.copy()
        R[0] = R[0] - P1
    elif mode == "lagged":
        R = np.zeros((max(P.degree, 1) + 1,) + P.shape)
        R[: P.degree + 1] = c
        R[1] = R[1] - P1
    else:
        raise ValueError(f"unknown mode {mode!r}; use 'at-one' or 'lagged'")
    return P1, PolyMatrix(_cumulative_quotient(R))


# ---------------------------------------------------------------------------
# scalar polynomials


class Polynomial:
    """Real scalar polynomial, lowest degree coefficient first."""

    __slots__ = ("_c",)

    def __init__(self, coeffs):
        c = np.atleast_1d(np.array(coeffs, dtype=float))
        if c.ndim != 1 or c.size == 0:
            raise ShapeError("polynomial coefficients must be a non-empty 1-d sequence")
        last = c.size
        while last > 1 and c[last - 1] == 0:
            last -= 1
        self._c = _freeze(c[:last].copy())

    @property
    def coeffs(self) -> np.ndarray:
        return self._c

    @property
    def degree(self) -> int:
        return self._c.size - 1

    @property
    def leading(self) -> float:
        return float(self._c[-1])

    def is_zero(self) -> bool:
        return self.degree == 0 and self._c[0] == 0

    def __call__(self, z):
        return np.polynomial.polynomial.polyval(z, self._c)

    def __mul__(self, other: "Polynomial") -> "Polynomial":
        return Polynomial(np.convolve(self._c, other._c))

    def __repr__(self) -> str:
        return f"Polynomial({self._c.tolist()})"

    def truncated(self, rel_tol: float = 1e-12) -> "Polynomial":
        scale = np.max(np.abs(self._c))
        c = self._c
        last = c.size
        while last > 1 and abs(c[last - 1]) <= rel_tol * scale:
            last -= 1
        return Polynomial(c[:last])

    @classmethod
    def from_roots(cls, roots, leading: float = 1.0) -> "Polynomial":
        c = np.polynomial.polynomial.polyfromroots(roots)
        return cls(np.real_if_close(c * leading).real)


def det_poly(P: PolyMatrix, rel_tol: float = 1e-12) -> Polynomial:
    """Determinant of a square matrix polynomial as a scalar polynomial.

    Evaluated at ``degree * rows + 1`` roots of unity and interpolated with an
    inverse DFT; trailing coefficients below ``rel_tol`` of the largest one
    are dropped.
    """
    if P.rows != P.cols:
        raise ShapeError(f"det_poly needs a square matrix, got {P.shape}")
    if P.degree == 0:
        return Polynomial([np.linalg.det(P.coeffs[0])])
    n = P.degree * P.rows + 1
    z = np.exp(2j * np.pi * np.arange(n) / n)
    vals = np.array([np.linalg.det(P.eval(zk)) for zk in z])
    c = np.fft.fft(vals).real / n
    # the DFT of values sampled on the circle is exact up to rounding
    scale = np.max(np.abs(c)) if np.any(c) else 1.0
    c[np.abs(c) <= 1e-14 * scale] = 0.0
    return Polynomial(c).truncated(rel_tol)


def poly_roots(p: Polynomial) -> np.ndarray:
    """All complex roots via companion-matrix eigenvalues."""
    if p.is_zero():
        raise ValueError("the zero polynomial has no finite root set")
    if p.degree == 0:
        return np.zeros(0, dtype=complex)
    return np.roots(p.coeffs[::-1]).astype(complex)


def sylvester_matrix(a: Polynomial, b: Polynomial) -> np.ndarray:
    n, m = a.degree, b.degree
    size = n + m
    S = np.zeros((size, size))
    ah = a.coeffs[::-1]
    bh = b.coeffs[::-1]
    for i in range(m):
        S[i, i : i + n + 1] = ah
    for i in range(n):
        S[m + i, i : i + m + 1] = bh
    return S


def resultant(a: Polynomial, b: Polynomial) -> float:
    """Resultant ``a_0^m b_0^n prod(alpha_i - beta_j)`` via the Sylvester determinant.

    ``a_0`` and ``b_0`` are the leading (highest degree) coefficients.
    """
    if a.is_zero() or b.is_zero() or a.leading == 0 or b.leading == 0:
        raise DegenerateResultant("leading coefficient is zero")
    if a.degree + b.degree == 0:
        return 1.0
    return float(np.linalg.det(sylvester_matrix(a, b)))


def monic_resultant(a: Polynomial, b: Polynomial) -> float:
    """Resultant of the monic versions of ``a`` and ``b``: ``prod(alpha_i - beta_j)``."""
    return resultant(a, b) / (a.leading ** b.degree * b.leading ** a.degree)


def numerical_rank(A: np.ndarray, tol: float = RANK_TOL) -> int:
    s = np.linalg.svd(np.atleast_2d(A), compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > tol * s[0]))


def rank_at(V: "PolyMatrix", z: complex, tol: float = RANK_TOL) -> int:
    """Rank of ``V(z)`` with singular values measured against ``sum_k |V_k| |z|^k``.

    A relative threshold on ``V(z)`` alone would call a matrix of rounding
    noise full rank at an exact zero.
    """
    az = abs(z)
    scale = sum(np.linalg.norm(ck, 2) * az ** k for k, ck in enumerate(V.coeffs))
    s = np.linalg.svd(np.atleast_2d(V.eval(z)), compute_uv=False)
    if scale == 0:
        return 0
    return int(np.sum(s > tol * scale))


# ---------------------------------------------------------------------------
# zerolessness and left inverses


@dataclass(frozen=True)
class ZerolessCertificate:
    """Outcome of :func:`is_zeroless`.

    When ``verdict`` is true, ``minor_pair`` holds row-index tuples of two
    ``cols x cols`` minors; the first minor's roots were all checked for full
    rank and ``resultant`` is the monic resultant of the two minor
    determinants (``None`` if no certifying second minor was found).
    When ``verdict`` is false, ``zero`` is a point where the rank drops to
    ``rank_at_zero``; ``zero`` is ``None`` if every minor vanishes identically.
    """

    verdict: bool
    minor_pair: Optional[Tuple[Tuple[int, ...], Tuple[int, ...]]] = None
    resultant: Optional[float] = None
    zero: Optional[complex] = None
    rank_at_zero: Optional[int] = None

    def __bool__(self) -> bool:
        return self.verdict


def _min_root_distance(ra: np.ndarray, rb: np.ndarray) -> float:
    if ra.size == 0 or rb.size == 0:
        return math.inf
    return float(np.min(np.abs(ra[:, None] - rb[None, :])))


def is_zeroless(V: PolyMatrix, tol: float = 1e-7) -> ZerolessCertificate:
    """Check that a tall polynomial matrix has full column rank at every ``z``.

    The roots of one non-vanishing ``cols x cols`` minor are collected and the
    rank of ``V(z)`` is tested at each of them (singular values above
    ``tol * sigma_max``). The default ``tol`` is looser than
    :data:`RANK_TOL` because multiple roots are only resolved to about
    ``sqrt(eps)``.
    """
    r, q = V.shape
    if r <= q:
        raise ShapeError(f"is_zeroless needs a tall matrix (rows > cols), got {V.shape}")
    minors = list(itertools.combinations(range(r), q))
    dets = {}
    first = None
    for idx in minors:
        p = det_poly(V.select_rows(idx))
        dets[idx] = p
        if np.max(np.abs(p.coeffs)) > 1e-12 * max(1.0, np.max(np.abs(V.coeffs))) ** q:
            first = idx
            break
    if first is None:
        return ZerolessCertificate(False, zero=None, rank_at_zero=rank_at(V, 0.0, tol))
    p = dets[first]
    roots = poly_roots(p)
    for z in roots:
        rk = rank_at(V, complex(z), tol)
        if rk < q:
            return ZerolessCertificate(False, zero=complex(z), rank_at_zero=rk)
    if roots.size == 0:
        return ZerolessCertificate(True, minor_pair=(first, first), resultant=1.0)
    for idx in minors:
        if idx == first:
            continue
        pj = dets.get(idx)
        if pj is None:
            pj = det_poly(V.select_rows(idx))
        if pj.is_zero():
            continue
        rj = poly_roots(pj)
        if _min_root_distance(roots, rj) <= ROOT_CLUSTER:
            continue
        res = monic_resultant(p, pj)
        if abs(res) > tol:
            return ZerolessCertificate(True, minor_pair=(first, idx), resultant=res)
    return ZerolessCertificate(True, minor_pair=(first, first), resultant=None)


def _companion(P: PolyMatrix) -> np.ndarray:
    """Block companion of the recursion ``y_t = -P_1 y_{t-1} - ... - P_p y_{t-p}``."""
    n, p = P.rows, P.degree
    comp = np.zeros((n * p, n * p))
    comp[:n, :] = -np.concatenate(list(P.coeffs[1:]), axis=1)
    if p > 1:
        comp[n:, :-n] = np.eye(n * (p - 1))
    return comp


def det_roots(P: PolyMatrix) -> np.ndarray:
    """Roots of ``det P(z)`` for square ``P`` with ``P(0) = I``.

    They are the reciprocals of the non-zero eigenvalues of the block
    companion matrix, which is better conditioned than rooting the scalar
    determinant when ``degree * rows`` is large.
    """
    if P.rows != P.cols:
        raise ShapeError("det_roots needs a square matrix")
    if not np.allclose(P.coeffs[0], np.eye(P.rows), atol=1e-12):
        raise ValueError("det_roots needs P(0) = I")
    if P.degree == 0:
        return np.zeros(0, dtype=complex)
    lam = np.linalg.eigvals(_companion(P))
    lam = lam[np.abs(lam) > 1e-13]
    return 1.0 / lam


def spectral_radius_companion(P: PolyMatrix) -> float:
    if P.degree == 0:
        return 0.0
    return float(np.max(np.abs(np.linalg.eigvals(_companion(P)))))


def is_stable(P: PolyMatrix, margin: float = 1e-6) -> bool:
    """True when every root of ``det P(z)`` has modulus above ``1 + margin``."""
    return spectral_radius_companion(P) < 1.0 / (1.0 + margin)


def _convolution_system(M: PolyMatrix, p: int):
    r, q = M.shape
    s = M.degree
    K = p + s
    T = np.zeros((r * p, q * K))
    for i in range(1, p + 1):
        for k in range(i, min(i + s, K) + 1):
            T[(i - 1) * r : i * r, (k - 1) * q : k * q] = M.coeffs[k - i]
    Y = -np.concatenate([M.coeff(k) for k in range(1, K + 1)], axis=1)
    return T, Y


def _assemble(X: np.ndarray, r: int, p: int) -> PolyMatrix:
    blocks = [np.eye(r)] + [X[:, i * r : (i + 1) * r] for i in range(p)]
    return PolyMatrix(np.stack(blocks))


def _projection_solution(M: PolyMatrix, p: int) -> np.ndarray:
    """Coefficients of the population projection of ``y_t = M(L) u_t`` on ``p`` lags."""
    r = M.rows
    c = M.coeffs
    s = M.degree

    def gamma(k):
        # E y_t y_{t-k}' with unit innovation variance
        if abs(k) > s:
            return np.zeros((r, r))
        if k < 0:
            return gamma(-k).T
        return sum(c[j + k] @ c[j].T for j in range(s - k + 1))

    Gxx = np.block([[gamma(j - i) for j in range(1, p + 1)] for i in range(1, p + 1)])
    Gyx = np.concatenate([gamma(i) for i in range(1, p + 1)], axis=1)
    Phi = Gyx @ np.linalg.pinv(Gxx, rcond=1e-12)
    return -Phi


def left_inverse(
    M: PolyMatrix,
    max_degree: Optional[int] = None,
    tol: float = 1e-8,
    margin: float = 1e-6,
    check_zeroless: bool = True,
) -> PolyMatrix:
    """Finite-degree stable left inverse of a tall zeroless polynomial matrix.

    Returns ``N(L) = I + N_1 L + ... + N_p L^p`` of minimal degree ``p`` such
    that ``N(L) M(L) = M(0)`` coefficient-wise to ``tol`` (relative to the
    largest coefficient of ``M``) and every root of ``det N(z)`` lies outside
    the circle of radius ``1 + margin``. At each ``p`` the minimum-norm
    solution of the stacked convolution equations is tried first; if that
    solution is not stable the population projection of ``M(L) u_t`` on
    ``p`` of its own lags is tried, which satisfies the same equations.

    ``max_degree=None`` means ``max(12, ceil(q s / (r - q)) + 2)``: below
    ``q s / (r - q)`` the stacked system has fewer unknowns than equations.
    """
    r, q = M.shape
    if r <= q:
        raise ShapeError(f"left_inverse needs a tall matrix, got {M.shape}")
    if numerical_rank(M.coeffs[0]) < q:
        raise RankDeficientAtZero("M(0) does not have full column rank")
    if check_zeroless:
        cert = is_zeroless(M)
        if not cert:
            raise NotZeroless(f"M(z) loses rank at z={cert.zero}", cert)
    s = M.degree
    if s == 0:
        return PolyMatrix.identity(r)
    if max_degree is None:
        max_degree = max(12, math.ceil(q * s / (r - q)) + 2)
    scale = max(1.0, float(np.max(np.abs(M.coeffs))))
    M0 = PolyMatrix(M.coeffs[0])
    for p in range(1, max_degree + 1):
        T, Y = _convolution_system(M, p)
        X = np.linalg.lstsq(T.T, Y.T, rcond=None)[0].T
        N = _assemble(X, r, p)
        if (N @ M).max_abs_diff(M0) > tol * scale:
            continue
        if is_stable(N, margin):
            return N
        Xp = _projection_solution(M, p)
        Np = _assemble(Xp, r, p)
        if (Np @ M).max_abs_diff(M0) <= tol * scale and is_stable(Np, margin):
            return Np
    raise NoStableInverseWithinDegree(f"no stable left inverse of degree <= {max_degree}")


def left_inverse_null_directions(M: PolyMatrix, p: int) -> np.ndarray:
    """Basis of the homogeneous solutions of the degree-``p`` convolution system.

    Each returned row ``w`` (length ``r * p``) can be added, times any
    ``r``-vector ``g``, as ``X + g w`` to a left inverse ``X = [N_1 ... N_p]``
    of degree ``p`` without breaking ``N(L) M(L) = M(0)``.
    """
    T, _ = _convolution_system(M, p)
    u, s, vt = np.linalg.svd(T.T)
    rank = int(np.sum(s > RANK_TOL * (s[0] if s.size else 1.0)))
    return vt[rank:]


def coefficients_block(N: PolyMatrix) -> np.ndarray:
    """``[N_1 ... N_p]`` as one ``r x (r p)`` matrix."""
    return np.concatenate(list(N.coeffs[1:]), axis=1) if N.degree else np.zeros((N.rows, 0))


def from_coefficients_block(X: np.ndarray) -> PolyMatrix:
    r = X.shape[0]
    return _assemble(X, r, X.shape[1] // r)
