"""
Simulation of singular cointegrated factors and of the panels they load on.

Random numbers come from :class:`numpy.random.Philox`, a counter-based
generator, keyed by ``SeedSequence([seed, stream])``. Monte Carlo code uses
the replication index as the stream, so a replication's draws do not depend
on how replications are scheduled.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from singcoint.exceptions import ExplosiveSystem, InconsistentDraw, ShapeError
from singcoint.model import (
    GrangerRep,
    I1FamilySpec,
    build_c_poly,
    long_run_loading,
    pt_decompose,
    spectral_zero,
)
from singcoint.polymat import (
    PolyMatrix,
    bn_split,
    numerical_rank,
    spectral_radius_companion,
)

DEFAULT_BURN_IN = 200


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Philox generator for replication ``stream`` of experiment ``seed``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(stream)])))


def apply_lag_poly(P: PolyMatrix, X: np.ndarray) -> np.ndarray:
    """``P(L) x_t`` for a ``T x cols`` series with zero pre-sample values."""
    X = np.asarray(X, dtype=float)
    out = np.zeros((X.shape[0], P.rows))
    for k, Pk in enumerate(P.coeffs):
        if k >= X.shape[0]:
            break
        out[k:] += X[: X.shape[0] - k] @ Pk.T
    return out


# ---------------------------------------------------------------------------
# the Monte Carlo data generating process


@dataclass(eq=False)
class DgpDraw:
    """One draw of the VAR(2) truth ``A(L) F_t = G H u_t``.

    ``A(L) = (I - M1 L)(I - U1 L) = I - A1 L - A2 L^2`` with
    ``A1 = M1 + U1`` and ``A2 = -M1 U1``.
    """

    U1: np.ndarray
    M1: np.ndarray
    A1: np.ndarray
    A2: np.ndarray
    G: np.ndarray
    Hmix: np.ndarray
    C0: np.ndarray
    seed: int
    c: int

    @property
    def r(self) -> int:
        return self.C0.shape[0]

    @property
    def q(self) -> int:
        return self.C0.shape[1]

    @property
    def A(self) -> PolyMatrix:
        r = self.r
        return PolyMatrix(np.stack([np.eye(r), -self.A1, -self.A2]))


def _haar_orthogonal(rng: np.random.Generator, n: int) -> np.ndarray:
    Z = rng.standard_normal((n, n))
    Q, R = np.linalg.qr(Z)
    return Q * np.sign(np.diag(R))


def draw_dgp(seed: int, r: int = 4, q: int = 3, c: int = 3) -> DgpDraw:
    """Draw the simulation truth.

    ``U1`` has diagonal entries from U(0.5, 0.8) and off-diagonal ones from
    U(0, 0.3), rescaled to spectral radius 0.6. ``G`` is the first ``q``
    columns of ``Q diag(g)^{1/2}`` with ``Q`` Haar-orthogonal and ``g`` having
    ``q`` entries from U(0.8, 1.2) and ``r - q`` zeros. ``Hmix`` rotates ``G``
    so that the upper ``q x q`` block of ``C0 = G Hmix`` is lower triangular
    with a positive diagonal.
    """
    if not (r > q > 0 and r > c >= r - q):
        raise ShapeError(f"invalid dimensions r={r}, q={q}, c={c}")
    rng = make_rng(seed, 0)
    U1 = rng.uniform(0.0, 0.3, size=(r, r))
    U1[np.diag_indices(r)] = rng.uniform(0.5, 0.8, size=r)
    U1 *= 0.6 / np.max(np.abs(np.linalg.eigvals(U1)))
    M1 = np.zeros((r, r))
    M1[: r - c, : r - c] = np.eye(r - c)
    A1 = M1 + U1
    A2 = -M1 @ U1
    g = np.zeros(r)
    g[:q] = rng.uniform(0.8, 1.2, size=q)
    Q = _haar_orthogonal(rng, r)
    G = (Q @ np.diag(np.sqrt(g)))[:, :q]
    # upper block = R' Q' from the QR of its transpose
    Qb, Rb = np.linalg.qr(G[:q, :].T)
    Hmix = Qb * np.sign(np.diag(Rb))
    C0 = G @ Hmix
    return DgpDraw(U1=U1, M1=M1, A1=A1, A2=A2, G=G, Hmix=Hmix, C0=C0, seed=int(seed), c=c)


def rank_factor(A1: np.ndarray, c: int, tol: float = 1e-8) -> Tuple[np.ndarray, np.ndarray]:
    """``(alpha, beta)`` with ``alpha beta' = A1``, ``beta`` orthonormal, rank ``c`` enforced."""
    u, s, vt = np.linalg.svd(A1)
    rank = int(np.sum(s > tol * s[0]))
    if rank != c:
        raise InconsistentDraw(f"A(1) has numerical rank {rank}, expected {c}")
    return u[:, :c] * s[:c], vt[:c].T


def dgp_to_spec(draw: DgpDraw) -> Tuple[I1FamilySpec, GrangerRep]:
    """Family form and error-correction form of a DGP draw.

    With ``A(L) = (I - M1 L)(I - U1 L)``, ``S(L) = I - U1 L`` and
    ``C(L) = diag(I_{r-c}, (1 - L) I_c) C0``, so ``xi = [I; 0]``,
    ``eta' = `` the first ``r - c`` rows of ``C0``, ``D = diag(0, I_c) C0``
    and ``E = 0``. The returned representation carries ``A(L)`` itself.
    """
    r, q, c = draw.r, draw.q, draw.c
    k = r - c
    xi = np.zeros((r, k))
    xi[:k, :k] = np.eye(k)
    eta = draw.C0[:k, :].T
    sel = np.zeros((r, r))
    sel[k:, k:] = np.eye(c)
    D = sel @ draw.C0
    S = PolyMatrix(np.stack([np.eye(r), -draw.U1]))
    spec = I1FamilySpec(r=r, q=q, c=c, xi=xi, eta=eta, D=D, E=np.zeros((r, q)), S=S)
    A = draw.A
    alpha, beta = rank_factor(A.at_one(), c)
    _, A_star = bn_split(A, "lagged")
    xi_perp = np.zeros((r, c))
    xi_perp[k:, :] = np.eye(c)
    zeta = np.vstack([xi_perp.T, xi.T])
    rep = GrangerRep(zeta=zeta, xi_perp=xi_perp, M=None, N=None, A=A, A_star=A_star,
                     alpha=alpha, beta=beta, h=np.zeros(r), k=np.zeros(c), C0=draw.C0.copy(),
                     gamma_u=np.eye(q))
    return spec, rep


# ---------------------------------------------------------------------------
# factor paths


@dataclass(eq=False)
class SimPath:
    """A simulated factor path.

    ``F_full``/``u_full`` include the ``burn_in`` leading observations; the
    ``F``/``u`` properties return the retained ``T`` rows. The simulation
    starts from zero, i.e. the level constant ``W`` is zero unless ``W`` is
    given. ``v1``, ``v2`` and ``trend`` (the common trend ``xi * cumsum(v2)``)
    are filled only when the family spec is known, over the full sample.
    """

    F_full: np.ndarray
    u_full: np.ndarray
    burn_in: int
    W: np.ndarray
    v1: Optional[np.ndarray] = None
    v2: Optional[np.ndarray] = None
    trend: Optional[np.ndarray] = None

    @property
    def T(self) -> int:
        return self.F_full.shape[0] - self.burn_in

    @property
    def F(self) -> np.ndarray:
        return self.F_full[self.burn_in :]

    @property
    def u(self) -> np.ndarray:
        return self.u_full[self.burn_in :]


def _as_rep(rep) -> GrangerRep:
    if isinstance(rep, DgpDraw):
        return dgp_to_spec(rep)[1]
    return rep


def simulate_factors(
    rep: Union[GrangerRep, DgpDraw],
    T: int,
    burn_in: int = DEFAULT_BURN_IN,
    seed: int = 0,
    stream: int = 0,
    spec: Optional[I1FamilySpec] = None,
    u: Optional[np.ndarray] = None,
    W: Optional[np.ndarray] = None,
) -> SimPath:
    """Run ``F_t = -A_1 F_{t-1} - ... - A_P F_{t-P} + h + C0 u_t`` forward from zero.

    ``u`` (``(burn_in + T) x q``) overrides the Gaussian draw, which is
    scaled by the Cholesky factor of ``gamma_u``. ``W`` shifts the whole
    path by a constant; the shifted path satisfies
    ``A(L) F_t = h + A(1) W + C0 u_t``, so the intercept ``A(1) W`` of a
    level constant can be realised either way.
    """
    rep = _as_rep(rep)
    A = rep.A
    r, q = rep.r, rep.q
    if spectral_radius_companion(A) > 1 + 1e-8:
        raise ExplosiveSystem("A(L) has roots inside the unit circle")
    n = T + burn_in
    if u is None:
        gamma = rep.gamma_u if rep.gamma_u is not None else np.eye(q)
        chol = np.linalg.cholesky(gamma)
        u = make_rng(seed, stream).standard_normal((n, q)) @ chol.T
    u = np.asarray(u, dtype=float)
    if u.shape != (n, q):
        raise ShapeError(f"u must have shape {(n, q)}, got {u.shape}")
    eps = u @ rep.C0.T + rep.h
    negA = [-a for a in A.coeffs[1:]]
    P = len(negA)
    F = np.zeros((n, r))
    for t in range(n):
        acc = eps[t].copy()
        for i in range(min(P, t)):
            acc += negA[i] @ F[t - 1 - i]
        F[t] = acc
    W = np.zeros(r) if W is None else np.asarray(W, dtype=float).reshape(r)
    path = SimPath(F_full=F + W, u_full=u, burn_in=burn_in, W=W)
    if spec is not None:
        attach_pt(path, spec)
    return path


def attach_pt(path: SimPath, spec: I1FamilySpec) -> SimPath:
    """Fill ``v1``, ``v2`` and the common trend of ``path`` in place."""
    pt = pt_decompose(spec)
    v1, v2 = pt.shocks(path.u_full)
    path.v1, path.v2 = v1, v2
    path.trend = np.cumsum(v2, axis=0) @ spec.xi.T
    return path


def recursion_residual(path: SimPath, rep: Union[GrangerRep, DgpDraw]) -> float:
    """``max |A(L) F_t - h - C0 u_t|`` over the retained sample."""
    rep = _as_rep(rep)
    lhs = apply_lag_poly(rep.A, path.F_full - path.W)
    rhs = path.u_full @ rep.C0.T + rep.h
    return float(np.max(np.abs(lhs - rhs)[path.burn_in :]))


def pt_reconstruction_error(path: SimPath, spec: I1FamilySpec) -> Tuple[float, float]:
    """Compare the permanent/transitory rebuild with ``C(L) u_t`` and ``S(L) (1-L) F_t``.

    Returns the two maximum absolute discrepancies over the full sample.
    """
    if path.v2 is None:
        attach_pt(path, spec)
    pt = pt_decompose(spec)
    C = build_c_poly(spec)
    cu = apply_lag_poly(C, path.u_full)
    diff1 = PolyMatrix.one_minus_lag(spec.r)
    rebuilt = apply_lag_poly(diff1, path.trend) + apply_lag_poly(diff1, apply_lag_poly(pt.G2, path.v2))
    if pt.G1 is not None:
        rebuilt = rebuilt + apply_lag_poly(diff1, apply_lag_poly(pt.G1, path.v1))
    dF = np.diff(path.F_full - path.W, axis=0, prepend=np.zeros((1, spec.r)))
    s_df = apply_lag_poly(spec.S, dF)
    return float(np.max(np.abs(rebuilt - cu))), float(np.max(np.abs(s_df - cu)))


# ---------------------------------------------------------------------------
# panels


@dataclass(eq=False)
class PanelSpec:
    """Loadings and idiosyncratic dynamics of ``x_t = Lambda F_t + eps_t``.

    ``idio_order[i]`` is ``"I0"`` (AR(1) with coefficient ``idio_ar[i]``) or
    ``"I1"`` (random walk); ``idio_scale`` is the innovation standard deviation.
    """

    Lambda: np.ndarray
    idio_order: Sequence[str]
    idio_ar: Optional[np.ndarray] = None
    idio_scale: Optional[np.ndarray] = None

    def __post_init__(self):
        self.Lambda = np.atleast_2d(np.asarray(self.Lambda, dtype=float))
        n, r = self.Lambda.shape
        if n < r:
            raise ShapeError(f"panel size n={n} must be at least r={r}")
        self.idio_order = [str(f).upper() for f in self.idio_order]
        if len(self.idio_order) != n or any(f not in ("I0", "I1") for f in self.idio_order):
            raise ShapeError("idio_order needs one 'I0'/'I1' flag per series")
        self.idio_ar = np.full(n, 0.5) if self.idio_ar is None else np.asarray(self.idio_ar, float)
        self.idio_scale = np.ones(n) if self.idio_scale is None else np.asarray(self.idio_scale, float)
        if np.any(np.abs(self.idio_ar) >= 1):
            raise ShapeError("AR coefficients of I(0) idiosyncratic terms must lie in (-1, 1)")

    @property
    def n(self) -> int:
        return self.Lambda.shape[0]


def simulate_panel(path: SimPath, panel: PanelSpec, seed: int = 0, stream: int = 0) -> np.ndarray:
    """``T x n`` panel ``x_t = Lambda F_t + eps_t`` over the retained sample."""
    F = path.F
    if F.shape[1] != panel.Lambda.shape[1]:
        raise ShapeError("loadings do not match the factor dimension")
    T, n = F.shape[0], panel.n
    e = make_rng(seed, stream).standard_normal((T, n)) * panel.idio_scale
    rho = np.where(np.array(panel.idio_order) == "I1", 1.0, panel.idio_ar)
    eps = np.zeros((T, n))
    prev = np.zeros(n)
    for t in range(T):
        prev = rho * prev + e[t]
        eps[t] = prev
    return F @ panel.Lambda.T + eps


@dataclass(frozen=True)
class SubvectorVerdict:
    chi_cointegrated: bool
    x_cointegrated: Optional[bool]
    rank: int
    p: int
    reason: str


def predict_subvector_cointegration(
    Lambda_p: np.ndarray,
    spec: I1FamilySpec,
    idio_flags: Optional[Sequence[str]] = None,
    tol: float = 1e-10,
) -> SubvectorVerdict:
    """Cointegration of a ``p``-dimensional common-component subvector.

    ``chi`` is cointegrated iff ``rank(Lambda_p S(1)^{-1} xi) < p`` (with
    ``S = I`` this is ``rank(Lambda_p xi)``). With idiosyncratic flags, the
    I(1) terms are taken to be independent random walks, so the observable
    subvector is cointegrated iff some cointegration vector of ``chi`` is
    supported on the I(0) series alone.
    """
    Lambda_p = np.atleast_2d(np.asarray(Lambda_p, dtype=float))
    p = Lambda_p.shape[0]
    loading = Lambda_p @ long_run_loading(spec)
    rank = numerical_rank(loading, tol) if np.any(loading) else 0
    chi = rank < p
    if p > spec.q - spec.d:
        reason = f"p={p} exceeds the number of permanent shocks q-d={spec.q - spec.d}"
    elif chi:
        reason = f"rank(Lambda_p xi)={rank} < p={p}"
    else:
        reason = f"rank(Lambda_p xi)={rank} = p"
    x = None
    if idio_flags is not None:
        flags = [str(f).upper() for f in idio_flags]
        if len(flags) != p:
            raise ShapeError("one idiosyncratic flag per row of Lambda_p is required")
        stationary = [i for i, f in enumerate(flags) if f == "I0"]
        if not stationary:
            x = False
            reason += "; all idiosyncratic terms I(1), no common cointegration vector"
        else:
            sub = loading[stationary]
            sub_rank = numerical_rank(sub, tol) if np.any(sub) else 0
            x = sub_rank < len(stationary)
            reason += f"; rank on I(0) series {sub_rank} vs {len(stationary)}"
    return SubvectorVerdict(chi_cointegrated=chi, x_cointegrated=x, rank=rank, p=p, reason=reason)


def panel_spectral_zero(panel: PanelSpec, spec: I1FamilySpec) -> Tuple[np.ndarray, np.ndarray]:
    """Zero-frequency spectral densities of ``(1-L) chi_t`` and ``(1-L) eps_t``."""
    chi = panel.Lambda @ spectral_zero(spec) @ panel.Lambda.T
    is_rw = np.array(panel.idio_order) == "I1"
    eps = np.diag(np.where(is_rw, panel.idio_scale ** 2 / (2 * np.pi), 0.0))
    return chi, eps
