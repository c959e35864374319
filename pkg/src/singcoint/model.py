"""
Reduced-rank I(1) families and their error-correction representation.

A family member is parameterised by

    (1 - L) F_t = S(L)^{-1} C(L) u_t,
    C(L) = xi eta' + (1 - L) D + (1 - L)^2 E(L),

with ``F_t`` of dimension ``r`` driven by ``q < r`` shocks and cointegration
rank ``c = r - rank(xi eta')``. From it we derive the finite-degree VECM

    A(L) F_t = A*(L) (1 - L) F_t + alpha beta' F_{t-1} = h + C(0) u_t,

the permanent/transitory split of the shocks and the impulse responses.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from singcoint.exceptions import GenericityViolation, GenericityWarning, ShapeError
from singcoint.polymat import (
    PolyMatrix,
    bn_split,
    det_poly,
    is_stable,
    is_zeroless,
    left_inverse,
    numerical_rank,
    poly_roots,
    rank_at,
    vstack,
)

DEFAULT_HORIZON = 80


@dataclass(eq=False)
class I1FamilySpec:
    """One member of a rational reduced-rank I(1) family.

    Attributes
    ----------
    r, q, c : int
        Dimension of the factors, number of shocks, cointegration rank.
    xi : ndarray (r, r - c)
    eta : ndarray (q, r - c)
    D : ndarray (r, q)
    E : PolyMatrix (r x q)
    S : PolyMatrix (r x r), ``S(0) = I`` and ``det S(z) != 0`` for ``|z| <= 1``.
    gamma_u : ndarray (q, q), innovation covariance.
    """

    r: int
    q: int
    c: int
    xi: np.ndarray
    eta: np.ndarray
    D: np.ndarray
    E: PolyMatrix
    S: PolyMatrix
    gamma_u: Optional[np.ndarray] = None

    def __post_init__(self):
        r, q, c = int(self.r), int(self.q), int(self.c)
        self.r, self.q, self.c = r, q, c
        if not (r > q > 0):
            raise ShapeError(f"need r > q > 0, got r={r}, q={q}")
        if not (r > c >= r - q):
            raise ShapeError(f"need r > c >= r - q, got r={r}, q={q}, c={c}")
        self.xi = np.asarray(self.xi, dtype=float).reshape(r, r - c)
        self.eta = np.asarray(self.eta, dtype=float).reshape(q, r - c)
        self.D = np.asarray(self.D, dtype=float).reshape(r, q)
        if not isinstance(self.E, PolyMatrix):
            self.E = PolyMatrix(self.E)
        if not isinstance(self.S, PolyMatrix):
            self.S = PolyMatrix(self.S)
        if self.E.shape != (r, q):
            raise ShapeError(f"E must be {r}x{q}, got {self.E.shape}")
        if self.S.shape != (r, r):
            raise ShapeError(f"S must be {r}x{r}, got {self.S.shape}")
        if not np.array_equal(self.S.coeffs[0], np.eye(r)):
            raise ShapeError("S(0) must equal the identity")
        if not is_stable(self.S, margin=0.0):
            raise ShapeError("det S(z) has a root inside or on the unit circle")
        if self.gamma_u is None:
            self.gamma_u = np.eye(q)
        self.gamma_u = np.asarray(self.gamma_u, dtype=float).reshape(q, q)
        if not np.allclose(self.gamma_u, self.gamma_u.T):
            raise ShapeError("gamma_u must be symmetric")
        if np.min(np.linalg.eigvalsh(self.gamma_u)) <= 0:
            raise ShapeError("gamma_u must be positive definite")
        k = r - c
        if numerical_rank(self.xi) < k or numerical_rank(self.eta) < k:
            warnings.warn(
                "xi or eta is not of full column rank r - c; the declared "
                "cointegration rank is not attained",
                GenericityWarning,
                stacklevel=2,
            )

    @property
    def d(self) -> int:
        return self.c - (self.r - self.q)


def random_spec(
    rng: np.random.Generator,
    r: int,
    q: int,
    c: int,
    s1: int = 1,
    s2: int = 1,
    scale: float = 0.5,
) -> I1FamilySpec:
    """Draw a generic family member with Gaussian parameters and a stable ``S(L)``."""
    k = r - c
    xi = rng.standard_normal((r, k))
    eta = rng.standard_normal((q, k))
    D = rng.standard_normal((r, q))
    E = PolyMatrix(scale * rng.standard_normal((s1 + 1, r, q)))
    if s2 == 0:
        S = PolyMatrix.identity(r)
    else:
        raw = rng.standard_normal((s2, r, r)) / np.sqrt(r)
        shrink = 0.5
        while True:
            S = PolyMatrix(np.concatenate([np.eye(r)[None], shrink * raw]))
            if is_stable(S, margin=0.25):
                break
            shrink *= 0.7
    return I1FamilySpec(r=r, q=q, c=c, xi=xi, eta=eta, D=D, E=E, S=S)


def orth_complement(B: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Orthonormal basis of the orthogonal complement of the columns of ``B``.

    Taken from a complete QR factorisation, so the result is deterministic.
    """
    B = np.atleast_2d(np.asarray(B, dtype=float))
    n, m = B.shape
    if m >= n or numerical_rank(B, tol) < m:
        raise ValueError(f"orth_complement needs a full column rank n x m matrix with m < n, got rank "
                         f"{numerical_rank(B, tol)} for shape {B.shape}")
    Q, _ = np.linalg.qr(B, mode="complete")
    return Q[:, m:]


def build_c_poly(spec: I1FamilySpec) -> PolyMatrix:
    """``C(L) = xi eta' + (1 - L) D + (1 - L)^2 E(L)``."""
    r = spec.r
    C = PolyMatrix(spec.xi @ spec.eta.T)
    C = C + PolyMatrix.one_minus_lag(r) @ PolyMatrix(spec.D)
    C = C + PolyMatrix.one_minus_lag(r, 2) @ spec.E
    return C


def build_m_poly(spec: I1FamilySpec) -> Tuple[np.ndarray, PolyMatrix]:
    """Return ``(zeta, M(L))`` with ``zeta C(L) = diag((1-L) I_c, I_{r-c}) M(L)``.

    ``zeta`` stacks ``xi_perp'`` on top of ``xi'``.
    """
    xi, eta, D, E = spec.xi, spec.eta, spec.D, spec.E
    xi_perp = orth_complement(xi)
    zeta = np.vstack([xi_perp.T, xi.T])
    if numerical_rank(zeta) < spec.r:
        raise GenericityViolation("zeta = [xi_perp'; xi'] is singular")
    c = spec.c
    q = spec.q
    top = PolyMatrix(xi_perp.T @ D) + PolyMatrix.one_minus_lag(c) @ (xi_perp.T @ E)
    k = spec.r - spec.c
    bottom = (
        PolyMatrix(xi.T @ xi @ eta.T)
        + PolyMatrix.one_minus_lag(k) @ PolyMatrix(xi.T @ D)
        + PolyMatrix.one_minus_lag(k, 2) @ (xi.T @ E)
    )
    M = vstack([top, bottom])
    assert M.shape == (spec.r, q)
    return zeta, M


def _diag_lag_block(c: int, r: int, first_differenced: bool) -> PolyMatrix:
    """``diag(I_c, (1-L) I_{r-c})`` or, with ``first_differenced``, ``diag((1-L) I_c, I_{r-c})``."""
    coeffs = np.zeros((2, r, r))
    coeffs[0] = np.eye(r)
    if first_differenced:
        coeffs[1, :c, :c] = -np.eye(c)
    else:
        coeffs[1, c:, c:] = -np.eye(r - c)
    return PolyMatrix(coeffs)


@dataclass(eq=False)
class GrangerRep:
    """Error-correction representation ``A(L) F_t = h + C0 u_t``.

    ``A(L) = A*(L) (1 - L) + alpha beta' L`` with ``A(0) = I`` and
    ``A(1) = alpha beta'`` of rank ``c``. ``M`` and ``N`` are the polynomial
    whose left inverse was taken and that left inverse; they are ``None``
    when ``A(L)`` was given directly (simulation truth).
    """

    zeta: Optional[np.ndarray]
    xi_perp: Optional[np.ndarray]
    M: Optional[PolyMatrix]
    N: Optional[PolyMatrix]
    A: PolyMatrix
    A_star: PolyMatrix
    alpha: np.ndarray
    beta: np.ndarray
    h: np.ndarray
    k: np.ndarray
    C0: np.ndarray
    gamma_u: Optional[np.ndarray] = None

    @property
    def r(self) -> int:
        return self.A.rows

    @property
    def q(self) -> int:
        return self.C0.shape[1]

    @property
    def c(self) -> int:
        return self.alpha.shape[1]

    @property
    def A1(self) -> np.ndarray:
        return self.A.at_one()


def degenerate_cointegration_vectors(C: PolyMatrix, tol: float = 1e-10) -> np.ndarray:
    """Constant vectors ``d`` with ``d' C(L) = 0`` (columns of the result)."""
    stacked = np.concatenate(list(C.coeffs), axis=1)
    u, s, _ = np.linalg.svd(stacked)
    rank = int(np.sum(s > tol * (s[0] if s.size and s[0] > 0 else 1.0)))
    return u[:, rank:]


def granger_rep(
    spec: I1FamilySpec,
    max_degree: Optional[int] = None,
    k: Optional[np.ndarray] = None,
    N: Optional[PolyMatrix] = None,
) -> GrangerRep:
    """Finite-degree error-correction representation of a family member.

    Parameters
    ----------
    spec : I1FamilySpec
    max_degree : int, optional
        Passed to :func:`~singcoint.polymat.left_inverse`.
    k : array_like (c,), optional
        Mean of ``xi_perp' S(L) F_t``; zero by default, which gives ``h = 0``.
    N : PolyMatrix, optional
        A precomputed left inverse of ``M(L)``. Any valid left inverse gives
        the same impulse responses.

    Raises
    ------
    NotZeroless
        ``M(z)`` loses rank somewhere: the parameter point is non-generic.
    NoStableInverseWithinDegree
    """
    r, c = spec.r, spec.c
    C = build_c_poly(spec)
    if degenerate_cointegration_vectors(C).shape[1]:
        warnings.warn("C(L) has a constant left null vector (degenerate cointegration)",
                      GenericityWarning, stacklevel=2)
    zeta, M = build_m_poly(spec)
    if N is None:
        N = left_inverse(M, max_degree=max_degree)
    zeta_inv = np.linalg.inv(zeta)
    A = zeta_inv @ (N @ (_diag_lag_block(c, r, False) @ (zeta @ spec.S)))
    # rounding leaves ~1e-18 coefficients above the true degree
    A = A.truncated(1e-13 * max(1.0, float(np.max(np.abs(A.coeffs)))))
    xi_perp = zeta[:c].T
    alpha = zeta_inv @ N.at_one()[:, :c]
    beta = spec.S.at_one().T @ xi_perp
    _, A_star = bn_split(A, "lagged")
    k = np.zeros(c) if k is None else np.asarray(k, dtype=float).reshape(c)
    # A(1) W = alpha xi_perp' S(1) W = alpha k for any level shift W with mean k
    h = alpha @ k
    C0 = C.coeffs[0].copy()
    return GrangerRep(zeta=zeta, xi_perp=xi_perp, M=M, N=N, A=A, A_star=A_star, alpha=alpha,
                      beta=beta, h=h, k=k, C0=C0, gamma_u=spec.gamma_u)


@dataclass(eq=False)
class PtDecomp:
    """Permanent/transitory split ``C(L) u = (1-L) G1 v1 + (xi + (1-L) G2) v2``.

    ``v1 = eta_perp' u`` are the ``d`` transitory shocks and ``v2 = eta' u``
    the ``q - d`` permanent ones; ``u = eta_perp_bar v1 + eta_bar v2``.
    """

    G1: PolyMatrix
    G2: PolyMatrix
    xi: np.ndarray
    eta: np.ndarray
    eta_bar: np.ndarray
    eta_perp_bar: np.ndarray
    eta_perp: np.ndarray

    @property
    def n_permanent(self) -> int:
        return self.xi.shape[1]

    @property
    def n_transitory(self) -> int:
        return self.eta_perp.shape[1]

    def shocks(self, u: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Split a ``T x q`` shock path into ``(v1, v2)``."""
        return u @ self.eta_perp, u @ self.eta


def pt_decompose(spec: I1FamilySpec) -> PtDecomp:
    q, d = spec.q, spec.d
    eta = spec.eta
    eta_bar = eta @ np.linalg.inv(eta.T @ eta)
    if d > 0:
        eta_perp = orth_complement(eta)
        eta_perp_bar = eta_perp @ np.linalg.inv(eta_perp.T @ eta_perp)
    else:
        eta_perp = np.zeros((q, 0))
        eta_perp_bar = np.zeros((q, 0))
    inner = PolyMatrix(spec.D) + PolyMatrix.one_minus_lag(spec.r) @ spec.E
    G2 = inner @ eta_bar
    G1 = inner @ eta_perp_bar if d > 0 else None
    return PtDecomp(G1=G1, G2=G2, xi=spec.xi.copy(), eta=eta.copy(), eta_bar=eta_bar,
                    eta_perp_bar=eta_perp_bar, eta_perp=eta_perp)


@dataclass(eq=False)
class IrfSet:
    """Impulse responses up to horizon ``H``.

    ``diff_coeffs[j]`` is the response of ``(1 - L) F`` at lag ``j`` and
    ``level_coeffs[j] = diff_coeffs[0] + ... + diff_coeffs[j]`` the response
    of ``F``; both have shape ``(H + 1, r, q)``.
    """

    horizons: int
    diff_coeffs: np.ndarray
    level_coeffs: np.ndarray

    @classmethod
    def from_diff(cls, U: np.ndarray) -> "IrfSet":
        U = np.asarray(U, dtype=float)
        return cls(U.shape[0] - 1, U, np.cumsum(U, axis=0))

    @classmethod
    def from_levels(cls, Hl: np.ndarray) -> "IrfSet":
        Hl = np.asarray(Hl, dtype=float)
        U = np.diff(Hl, axis=0, prepend=np.zeros((1,) + Hl.shape[1:]))
        return cls(Hl.shape[0] - 1, U, Hl)


def theoretical_irf(spec: I1FamilySpec, H: int = DEFAULT_HORIZON) -> IrfSet:
    """Responses from the power series ``U(L) = S(L)^{-1} C(L)``."""
    C = build_c_poly(spec)
    S = spec.S
    U = np.zeros((H + 1, spec.r, spec.q))
    for j in range(H + 1):
        acc = C.coeff(j).copy()
        for i in range(1, min(j, S.degree) + 1):
            acc -= S.coeffs[i] @ U[j - i]
        U[j] = acc
    return IrfSet.from_diff(U)


def ar_inverse_coeffs(A: PolyMatrix, H: int) -> np.ndarray:
    """``K_0, ..., K_H`` with ``K(L) A(L) = I`` for square ``A`` with ``A(0) = I``."""
    n = A.rows
    K = np.zeros((H + 1, n, n))
    K[0] = np.eye(n)
    for j in range(1, H + 1):
        acc = np.zeros((n, n))
        for i in range(1, min(j, A.degree) + 1):
            acc -= A.coeffs[i] @ K[j - i]
        K[j] = acc
    return K


def levels_irf(A: PolyMatrix, R: np.ndarray, H: int = DEFAULT_HORIZON) -> IrfSet:
    """Level responses ``K_j R`` implied by ``A(L) F_t = R u_t``."""
    K = ar_inverse_coeffs(A, H)
    return IrfSet.from_levels(K @ np.asarray(R, dtype=float))


def coint_rank_theoretical(spec: I1FamilySpec, tol: float = 1e-10) -> int:
    """``r - rank(C(1))`` with ``C(1) = xi eta'``; warns if it differs from ``spec.c``."""
    rank = numerical_rank(spec.xi @ spec.eta.T, tol)
    c = spec.r - rank
    if c != spec.c:
        warnings.warn(f"cointegration rank {c} differs from the declared c={spec.c}",
                      GenericityWarning, stacklevel=2)
    return c


def spectral_zero(spec: I1FamilySpec) -> np.ndarray:
    """Spectral density of ``(1 - L) F_t`` at frequency zero."""
    S1 = spec.S.at_one()
    if numerical_rank(S1) < spec.r:
        raise np.linalg.LinAlgError("S(1) is singular")
    U1 = np.linalg.solve(S1, spec.xi @ spec.eta.T)
    out = U1 @ spec.gamma_u @ U1.T / (2 * np.pi)
    return (out + out.T) / 2


def long_run_loading(spec: I1FamilySpec) -> np.ndarray:
    """``S(1)^{-1} xi``: loading of the common trend on ``F_t``."""
    return np.linalg.solve(spec.S.at_one(), spec.xi)


def check_fundamental(spec_or_C, tol: float = 1e-7) -> Tuple[bool, List[complex]]:
    """Whether ``C(z)`` has full column rank on the open unit disk.

    Returns ``(verdict, offending_zeros)``. Zeros on or outside the unit
    circle (``z = 1`` when ``d > 0``) are allowed.
    """
    C = build_c_poly(spec_or_C) if isinstance(spec_or_C, I1FamilySpec) else spec_or_C
    r, q = C.shape
    for idx in itertools.combinations(range(r), q):
        p = det_poly(C.select_rows(idx))
        if np.max(np.abs(p.coeffs)) > 1e-12:
            break
    else:
        return False, [0j]
    bad = []
    for z in poly_roots(p):
        if abs(z) < 1 - 1e-9 and rank_at(C, complex(z), tol) < q:
            bad.append(complex(z))
    return not bad, bad


def stacked_representation(Uf: PolyMatrix, p: int) -> Tuple[PolyMatrix, List[np.ndarray]]:
    """Stack ``U_f(L), L U_f(L), ..., L^p U_f(L)`` and list the trivial cointegration vectors.

    The vector ``t^{h,k}`` (``h = 1..q``, ``k = 1..p``) has ``+1`` in position
    ``h`` and ``-1`` in position ``k q + h``.
    """
    if p < 1:
        raise ValueError("p must be at least 1")
    q = Uf.rows
    U = vstack([Uf.shift(k) if k else Uf for k in range(p + 1)])
    r = q * (p + 1)
    vecs = []
    for h in range(q):
        for k in range(1, p + 1):
            t = np.zeros(r)
            t[h] = 1.0
            t[k * q + h] = -1.0
            vecs.append(t)
    return U, vecs


def zeroless_m(spec: I1FamilySpec):
    """Zeroless certificate for ``M(L)`` of ``spec``."""
    return is_zeroless(build_m_poly(spec)[1])
