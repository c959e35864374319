"""
Estimation of the three competing models on a factor path.

* ``ols_var``: unrestricted VAR by least squares, in levels or in first
  differences.
* ``johansen_vecm``: reduced-rank regression with known cointegration rank.
* ``identify_shocks``: rank-``q`` impact matrix with a recursive (lower
  triangular) upper block.

The VECM is parametrised as ``dY_t = -alpha beta' Y_{t-1} + sum_i Gamma_i dY_{t-i} + mu + e_t``,
so ``alpha beta'`` estimates ``A(1)`` of ``A(L) F_t = C0 u_t``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.linalg

from singcoint.exceptions import EigenFailure, EstimationWarning, InsufficientData, ShapeError
from singcoint.model import IrfSet, ar_inverse_coeffs, levels_irf
from singcoint.polymat import PolyMatrix

RIDGE_COND = 1e12


@dataclass(eq=False)
class VarEstimate:
    """``Y_t = mu + B_1 Y_{t-1} + ... + B_P Y_{t-P} + e_t`` (``Y`` differenced if ``kind='differences'``)."""

    kind: str
    lag_order: int
    coeffs: np.ndarray
    intercept: np.ndarray
    residuals: np.ndarray
    sigma: np.ndarray
    condition_number: float = float("nan")

    @property
    def B(self) -> List[np.ndarray]:
        return list(self.coeffs)

    def ar_poly(self) -> PolyMatrix:
        """``I - B_1 L - ... - B_P L^P``."""
        r = self.coeffs.shape[1]
        return PolyMatrix(np.concatenate([np.eye(r)[None], -self.coeffs]))


@dataclass(eq=False)
class VecmEstimate:
    """Reduced-rank regression output; ``beta_hat`` has orthonormal columns unless requested otherwise."""

    alpha_hat: np.ndarray
    beta_hat: np.ndarray
    gamma_hats: np.ndarray
    intercept: Optional[np.ndarray]
    residuals: np.ndarray
    sigma: np.ndarray
    eigenvalues: np.ndarray
    lag_order: int

    @property
    def Pi(self) -> np.ndarray:
        """``alpha_hat beta_hat'``, the estimate of ``A(1)``."""
        return self.alpha_hat @ self.beta_hat.T

    def levels_coeffs(self) -> np.ndarray:
        return vecm_to_levels(self.Pi, self.gamma_hats)

    def ar_poly(self) -> PolyMatrix:
        B = self.levels_coeffs()
        r = B.shape[1]
        return PolyMatrix(np.concatenate([np.eye(r)[None], -B]))


@dataclass(eq=False)
class ShockIdentification:
    R_hat: np.ndarray
    rotation: np.ndarray


def _lagmat(Y: np.ndarray, lags: int) -> np.ndarray:
    """Rows ``[Y_{t-1}, ..., Y_{t-lags}]`` for ``t = lags .. T-1``."""
    T = Y.shape[0]
    if lags == 0:
        return np.zeros((T, 0))
    return np.hstack([Y[lags - i : T - i] for i in range(1, lags + 1)])


def ols_var(Y: np.ndarray, lags: int, kind: str = "levels", intercept: bool = True) -> VarEstimate:
    """Equation-by-equation least squares VAR.

    Raises :class:`InsufficientData` unless ``T > r * lags + 5``. A design
    matrix with condition number above ``1e12`` triggers an
    :class:`EstimationWarning`; the number is stored on the result.
    """
    Y = np.asarray(Y, dtype=float)
    if Y.ndim != 2:
        raise ShapeError("Y must be a T x r matrix")
    if kind not in ("levels", "differences"):
        raise ValueError(f"kind must be 'levels' or 'differences', got {kind!r}")
    if lags < 1:
        raise ValueError("lags must be at least 1")
    T, r = Y.shape
    if T <= r * lags + 5 + (kind == "differences"):
        raise InsufficientData(f"T={T} too short for {lags} lags of a {r}-variate VAR")
    Z = np.diff(Y, axis=0) if kind == "differences" else Y
    X = _lagmat(Z, lags)
    if intercept:
        X = np.hstack([np.ones((X.shape[0], 1)), X])
    y = Z[lags:]
    coef, _, _, sv = np.linalg.lstsq(X, y, rcond=None)
    cond = float(sv[0] / sv[-1]) if sv[-1] > 0 else float("inf")
    if cond > RIDGE_COND:
        warnings.warn(f"VAR design matrix is ill-conditioned (cond={cond:.3g})", EstimationWarning)
    resid = y - X @ coef
    mu = coef[0] if intercept else np.zeros(r)
    B = coef[int(intercept):].T.reshape(r, lags, r).transpose(1, 0, 2)
    sigma = resid.T @ resid / resid.shape[0]
    return VarEstimate(kind=kind, lag_order=lags, coeffs=B, intercept=mu, residuals=resid,
                       sigma=sigma, condition_number=cond)


def _residualize(Y: np.ndarray, X: np.ndarray) -> np.ndarray:
    if X.shape[1] == 0:
        return Y
    coef = np.linalg.lstsq(X, Y, rcond=None)[0]
    return Y - X @ coef


def _ridge(S: np.ndarray, name: str) -> np.ndarray:
    cond = np.linalg.cond(S)
    if not np.isfinite(cond) or cond > RIDGE_COND:
        eps = 1e-10 * np.trace(S) / S.shape[0]
        warnings.warn(f"{name} ill-conditioned (cond={cond:.3g}), adding ridge {eps:.3g}", EstimationWarning)
        return S + eps * np.eye(S.shape[0])
    return S


def johansen_vecm(
    Y: np.ndarray,
    lags: int,
    rank: int,
    det_spec: str = "none",
    beta_norm: str = "orthonormal",
) -> VecmEstimate:
    """Johansen reduced-rank regression with known rank.

    ``lags`` is the order of the levels VAR, so ``lags - 1`` lagged
    differences enter. ``det_spec`` is ``"none"`` or ``"const"`` (an
    unrestricted constant). ``beta_norm="identity"`` sets the leading
    ``rank x rank`` block of ``beta_hat`` to the identity.
    """
    Y = np.asarray(Y, dtype=float)
    T, r = Y.shape
    if not 0 < rank < r:
        raise ValueError(f"rank must lie in (0, {r}), got {rank}")
    if det_spec not in ("none", "const"):
        raise ValueError(f"det_spec must be 'none' or 'const', got {det_spec!r}")
    if lags < 1:
        raise ValueError("lags must be at least 1")
    n_reg = r * lags + (det_spec == "const")
    if T <= n_reg + 5:
        raise InsufficientData(f"T={T} too short for a VECM with {lags} lags in {r} variables")
    dY = np.diff(Y, axis=0)
    k = lags - 1
    Z0 = dY[k:]
    Z1 = Y[k : T - 1]
    Z2 = _lagmat(dY, k)
    if det_spec == "const":
        Z2 = np.hstack([np.ones((Z0.shape[0], 1)), Z2])
    n = Z0.shape[0]
    R0 = _residualize(Z0, Z2)
    R1 = _residualize(Z1, Z2)
    S00 = _ridge(R0.T @ R0 / n, "S00")
    S11 = _ridge(R1.T @ R1 / n, "S11")
    S01 = R0.T @ R1 / n
    try:
        lhs = S01.T @ np.linalg.solve(S00, S01)
        lam, V = scipy.linalg.eigh((lhs + lhs.T) / 2, S11)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
        raise EigenFailure(str(exc)) from exc
    if not np.all(np.isfinite(lam)):
        raise EigenFailure("non-finite canonical correlations")
    order = np.argsort(lam)[::-1]
    lam = np.clip(lam[order], 0.0, np.nextafter(1.0, 0.0))
    beta = V[:, order[:rank]]
    if beta_norm == "identity":
        head = beta[:rank]
        if np.linalg.cond(head) > 1e8:
            raise EigenFailure("leading block of beta is singular; use beta_norm='orthonormal'")
        beta = beta @ np.linalg.inv(head)
    elif beta_norm == "orthonormal":
        beta = np.linalg.qr(beta)[0]
    else:
        raise ValueError(f"unknown beta_norm {beta_norm!r}")
    # given beta, the remaining coefficients are OLS
    X = np.hstack([Z1 @ beta, Z2])
    coef = np.linalg.lstsq(X, Z0, rcond=None)[0]
    resid = Z0 - X @ coef
    alpha = -coef[:rank].T
    rest = coef[rank:]
    mu = None
    if det_spec == "const":
        mu, rest = rest[0], rest[1:]
    gammas = rest.T.reshape(r, k, r).transpose(1, 0, 2) if k else np.zeros((0, r, r))
    sigma = resid.T @ resid / n
    return VecmEstimate(alpha_hat=alpha, beta_hat=beta, gamma_hats=gammas, intercept=mu,
                        residuals=resid, sigma=sigma, eigenvalues=lam[:rank], lag_order=lags)


def vecm_to_levels(Pi: np.ndarray, gammas: np.ndarray) -> np.ndarray:
    """Levels VAR coefficients ``B_1..B_P`` from ``A(1) = Pi`` and ``Gamma_1..Gamma_{P-1}``."""
    r = Pi.shape[0]
    gammas = np.asarray(gammas, dtype=float).reshape(-1, r, r)
    P = gammas.shape[0] + 1
    B = np.zeros((P, r, r))
    padded = np.concatenate([np.zeros((1, r, r)), gammas, np.zeros((1, r, r))])
    for i in range(1, P + 1):
        B[i - 1] = padded[i] - padded[i - 1]
    B[0] += np.eye(r) - Pi
    return B


def levels_to_vecm(B: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Inverse of :func:`vecm_to_levels`: ``(Pi, gammas)`` with ``Gamma_i = -(B_{i+1} + ... + B_P)``."""
    B = np.asarray(B, dtype=float)
    r = B.shape[1]
    Pi = np.eye(r) - B.sum(axis=0)
    gammas = np.array([-B[i + 1 :].sum(axis=0) for i in range(B.shape[0] - 1)]).reshape(-1, r, r)
    return Pi, gammas


def identify_shocks(sigma: np.ndarray, q: int, tol: float = 1e-8) -> ShockIdentification:
    """Rank-``q`` impact matrix whose upper ``q x q`` block is lower triangular.

    ``K`` collects the top ``q`` principal components of ``sigma`` scaled by
    the square roots of their eigenvalues, eigenvector signs fixed so the
    largest entry is positive. The rotation comes from a QR factorisation of
    the transposed upper block, with signs chosen so the diagonal of the
    upper block of ``R_hat`` is nonnegative.
    """
    sigma = np.asarray(sigma, dtype=float)
    r = sigma.shape[0]
    if sigma.shape != (r, r) or not 0 < q <= r:
        raise ShapeError(f"need a square sigma and 0 < q <= {r}")
    lam, V = np.linalg.eigh((sigma + sigma.T) / 2)
    lam, V = lam[::-1], V[:, ::-1]
    if lam[q - 1] <= tol * max(lam[0], 0.0):
        warnings.warn(f"sigma has numerical rank below q={q}; using its best rank-{q} approximation",
                      EstimationWarning)
    V = V[:, :q]
    idx = np.argmax(np.abs(V), axis=0)
    V = V * np.sign(V[idx, np.arange(q)])
    K = V * np.sqrt(np.clip(lam[:q], 0.0, None))
    Q, R = np.linalg.qr(K[:q].T)
    s = np.sign(np.diag(R))
    s[s == 0] = 1.0
    rotation = Q * s
    return ShockIdentification(R_hat=K @ rotation, rotation=rotation)


def irf_from_estimate(est: Union[VarEstimate, VecmEstimate], ident: Union[ShockIdentification, np.ndarray],
                      H: int) -> IrfSet:
    """Level impulse responses of an estimated model to the identified shocks."""
    if H < 0:
        raise ValueError("horizon must be nonnegative")
    R = ident.R_hat if isinstance(ident, ShockIdentification) else np.asarray(ident, dtype=float)
    if isinstance(est, VarEstimate) and est.kind == "differences":
        return IrfSet.from_diff(ar_inverse_coeffs(est.ar_poly(), H) @ R)
    return levels_irf(est.ar_poly(), R, H)


def principal_angles(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Principal angles (radians) between the column spans of ``A`` and ``B``."""
    return scipy.linalg.subspace_angles(np.atleast_2d(A), np.atleast_2d(B))


ESTIMATORS = ("DVAR", "LVAR", "VECM")


def fit_estimator(name: str, F: np.ndarray, q: int, c: int, lags: int, H: int,
                  det_spec: str = "none") -> IrfSet:
    """Fit one of ``DVAR``/``LVAR``/``VECM`` to ``F`` and return its identified level IRFs.

    The two VARs always carry an intercept; ``det_spec`` applies to the VECM.
    """
    if name == "DVAR":
        est = ols_var(F, lags, "differences")
    elif name == "LVAR":
        est = ols_var(F, lags, "levels")
    elif name == "VECM":
        est = johansen_vecm(F, lags, c, det_spec)
    else:
        raise ValueError(f"unknown estimator {name!r}; expected one of {ESTIMATORS}")
    return irf_from_estimate(est, identify_shocks(est.sigma, q), H)
