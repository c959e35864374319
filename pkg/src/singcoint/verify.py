"""
Built-in acceptance checks.

Each ``check_*`` function runs one self-contained numerical experiment and
returns a :class:`CheckResult`; :func:`run_all` runs them in order. The test
suite and the ``verify`` command share these functions.
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional

import numpy as np

from singcoint.estimate import johansen_vecm, principal_angles
from singcoint.exceptions import GenericityWarning, SingCointError
from singcoint.model import (
    I1FamilySpec,
    build_m_poly,
    build_c_poly,
    granger_rep,
    levels_irf,
    pt_decompose,
    random_spec,
    spectral_zero,
    theoretical_irf,
)
from singcoint.montecarlo import McConfig, run_experiment
from singcoint.polymat import (
    PolyMatrix,
    Polynomial,
    coefficients_block,
    det_roots,
    from_coefficients_block,
    is_stable,
    left_inverse,
    left_inverse_null_directions,
    monic_resultant,
    numerical_rank,
)
from singcoint.simulate import (
    dgp_to_spec,
    draw_dgp,
    make_rng,
    predict_subvector_cointegration,
    pt_reconstruction_error,
    recursion_residual,
    simulate_factors,
)

DEFAULT_SEED = 0


@dataclass
class CheckResult:
    name: str
    passed: bool
    value: float
    threshold: float
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.name}: {self.detail} ({self.seconds:.1f}s)"


def _timed(fn):
    def wrapper(*args, **kwargs):
        t0 = time.perf_counter()
        res = fn(*args, **kwargs)
        res.seconds = time.perf_counter() - t0
        return res

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


def random_generic_specs(n: int, seed: int, max_r: int = 6, max_s: int = 2) -> List[I1FamilySpec]:
    """``n`` random family members with ``2 <= r <= max_r`` and lag degrees up to ``max_s``."""
    rng = make_rng(seed, 11)
    specs = []
    while len(specs) < n:
        r = int(rng.integers(2, max_r + 1))
        q = int(rng.integers(1, r))
        c = int(rng.integers(r - q, r))
        s1 = int(rng.integers(0, max_s + 1))
        s2 = int(rng.integers(0, max_s + 1))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", GenericityWarning)
            specs.append(random_spec(rng, r, q, c, s1, s2))
    return specs


@_timed
def check_left_inverse(n: int = 100, seed: int = DEFAULT_SEED) -> CheckResult:
    """``N(L) M(L) = M(0)`` and stability of ``det N`` on random generic members."""
    worst_err, min_root, failures = 0.0, np.inf, 0
    for spec in random_generic_specs(n, seed):
        _, M = build_m_poly(spec)
        try:
            N = left_inverse(M)
        except SingCointError:
            failures += 1
            continue
        worst_err = max(worst_err, (N @ M).max_abs_diff(PolyMatrix(M.coeffs[0])))
        roots = det_roots(N)
        if roots.size:
            min_root = min(min_root, float(np.min(np.abs(roots))))
    ok = failures == 0 and worst_err <= 1e-8 and min_root > 1.0
    return CheckResult("left-inverse identity", ok, worst_err, 1e-8,
                       f"{n} specs, max coeff error {worst_err:.2e}, min |root det N| "
                       f"{min_root:.4f}, failures {failures}")


def two_variable_example(a: float = 0.5, b: float = -0.5) -> PolyMatrix:
    return PolyMatrix(np.array([[[1.0], [1.0]], [[a], [b]]]))


@_timed
def check_two_variable_oracle(a: float = 0.5, b: float = -0.5) -> CheckResult:
    """Degree-1 left inverse of ``[1 + aL; 1 + bL]`` and its difference-VAR matrix."""
    M = two_variable_example(a, b)
    N = left_inverse(M)
    err = (N @ M).max_abs_diff(PolyMatrix(np.array([[1.0], [1.0]])))
    B = -N.coeffs[1] if N.degree >= 1 else np.zeros((2, 2))
    expected = np.array([[0.25, 0.25], [-0.25, -0.25]])
    # expected solves B [1; 1] = [a; b] and B [a; b] = 0 for a = 0.5, b = -0.5
    berr = float(np.max(np.abs(B - expected))) if (a, b) == (0.5, -0.5) else 0.0
    ok = N.degree == 1 and err <= 1e-12 and berr <= 1e-12
    return CheckResult("two-variable left-inverse oracle", ok, max(err, berr), 1e-12,
                       f"degree {N.degree}, identity error {err:.1e}, |B - B_expected| {berr:.1e}")


@_timed
def check_annihilation(n: int = 100, seed: int = DEFAULT_SEED, H: int = 200) -> CheckResult:
    """``beta'`` kills the long-run level response and ``S(1)^{-1} C(1)``."""
    worst_irf, worst_c1 = 0.0, 0.0
    for spec in random_generic_specs(n, seed + 1):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", GenericityWarning)
            rep = granger_rep(spec)
        irf = theoretical_irf(spec, H)
        worst_irf = max(worst_irf, float(np.max(np.abs(rep.beta.T @ irf.level_coeffs[H]))))
        C1 = build_c_poly(spec).at_one()
        long_run = np.linalg.solve(spec.S.at_one(), C1)
        worst_c1 = max(worst_c1, float(np.max(np.abs(rep.beta.T @ long_run))))
    ok = worst_irf <= 1e-6 and worst_c1 <= 1e-12
    return CheckResult("cointegration annihilation", ok, worst_irf, 1e-6,
                       f"max |beta' H_{H}| {worst_irf:.1e}, max |beta' S(1)^-1 C(1)| {worst_c1:.1e}")


@_timed
def check_pt_reconstruction(seed: int = DEFAULT_SEED, T: int = 1000) -> CheckResult:
    """Permanent/transitory rebuild of simulated differences for ``r=4, q=3, d=2``."""
    draw = draw_dgp(seed)
    dgp_spec, dgp_rep = dgp_to_spec(draw)
    rng = make_rng(seed, 12)
    rand_spec = random_spec(rng, 4, 3, 3, 1, 1)
    rand_rep = granger_rep(rand_spec)
    worst = 0.0
    counts = []
    for i, (spec, rep) in enumerate([(dgp_spec, dgp_rep), (rand_spec, rand_rep)]):
        path = simulate_factors(rep, T, burn_in=0, seed=seed, stream=100 + i, spec=spec)
        e1, e2 = pt_reconstruction_error(path, spec)
        worst = max(worst, e1, e2)
        pt = pt_decompose(spec)
        counts.append((pt.n_permanent, pt.n_transitory))
    ok = worst <= 1e-10 and all(cnt == (1, 2) for cnt in counts)
    return CheckResult("PT reconstruction", ok, worst, 1e-10,
                       f"T={T}, max error {worst:.1e}, (permanent, transitory) {counts[0]}")


@_timed
def check_recursion(seed: int = DEFAULT_SEED) -> CheckResult:
    """``A(L) F_t = h + C0 u_t`` on simulated paths from the DGP and from random members."""
    worst = 0.0
    n_paths = 0
    for s in range(seed, seed + 3):
        draw = draw_dgp(s)
        for T in (100, 1000):
            path = simulate_factors(draw, T, seed=s, stream=200 + T)
            worst = max(worst, recursion_residual(path, draw))
            n_paths += 1
    for j, spec in enumerate(random_generic_specs(10, seed + 2, max_r=5)):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", GenericityWarning)
            rep = granger_rep(spec, k=np.ones(spec.c))
        path = simulate_factors(rep, 500, seed=seed, stream=300 + j)
        worst = max(worst, recursion_residual(path, rep))
        n_paths += 1
    ok = worst <= 1e-9
    return CheckResult("VECM recursion", ok, worst, 1e-9, f"{n_paths} paths, max residual {worst:.1e}")


def three_variable_spec(a: float = 0.5, b: float = -0.5, c: float = 0.2) -> I1FamilySpec:
    """``(1 - L) F_t = [1 + aL; 1 + bL; 1 + cL] u_t`` as a family member (``r=3, q=1, c=2``)."""
    lead = np.array([[1 + a], [1 + b], [1 + c]])
    return I1FamilySpec(r=3, q=1, c=2, xi=lead, eta=np.ones((1, 1)),
                        D=-np.array([[a], [b], [c]]), E=np.zeros((1, 3, 1)),
                        S=PolyMatrix.identity(3))


def second_left_inverse(M: PolyMatrix, N: PolyMatrix, seed: int = 0) -> PolyMatrix:
    """Another stable left inverse of ``M``, moved along a homogeneous direction."""
    rng = make_rng(seed, 13)
    for p in range(max(N.degree, 1), N.degree + 4):
        W = left_inverse_null_directions(M, p)
        if W.shape[0] == 0:
            continue
        X = coefficients_block(N)
        X = np.hstack([X, np.zeros((M.rows, M.rows * p - X.shape[1]))])
        for scale in (0.3, 0.1, 0.03):
            g = scale * rng.standard_normal(M.rows)
            cand = from_coefficients_block(X + np.outer(g, W[0]))
            if is_stable(cand):
                return cand
    raise SingCointError("no alternative stable left inverse found")


@_timed
def check_irf_invariance(H: int = 50) -> CheckResult:
    """Two different left inverses give the same level responses."""
    spec = three_variable_spec()
    with warnings.catch_warnings():
        # h' C(L) = 0 for h orthogonal to (1, 1, 1) and (a, b, c): expected here
        warnings.simplefilter("ignore", GenericityWarning)
        rep1 = granger_rep(spec)
        N2 = second_left_inverse(rep1.M, rep1.N)
        rep2 = granger_rep(spec, N=N2)
    id_err = (N2 @ rep1.M).max_abs_diff(PolyMatrix(rep1.M.coeffs[0]))
    gap = max(rep1.A.max_abs_diff(rep2.A), 0.0)
    irf1 = levels_irf(rep1.A, rep1.C0, H).level_coeffs
    irf2 = levels_irf(rep2.A, rep2.C0, H).level_coeffs
    diff = float(np.max(np.abs(irf1 - irf2)))
    ok = diff <= 1e-10 and gap > 1e-3 and id_err <= 1e-10
    return CheckResult("IRF representation invariance", ok, diff, 1e-10,
                       f"max |H1 - H2| over lags <= {H}: {diff:.1e}, "
                       f"max |A1 - A2| {gap:.3f}")


@_timed
def check_johansen(seed: int = DEFAULT_SEED, T: int = 10000) -> CheckResult:
    """Consistency of the reduced-rank estimate on one long path of the DGP."""
    draw = draw_dgp(seed)
    _, rep = dgp_to_spec(draw)
    path = simulate_factors(rep, T, seed=seed, stream=0)
    est = johansen_vecm(path.F, 2, draw.c)
    angle = float(np.max(principal_angles(est.beta_hat, rep.beta)))
    err = float(np.linalg.norm(est.Pi - rep.A.at_one()))
    ok = angle < 0.05 and err < 0.1
    return CheckResult("Johansen consistency", ok, err, 0.1,
                       f"T={T}, max principal angle {angle:.4f} rad, "
                       f"||alpha beta' - A(1)||_F {err:.4f}")


@_timed
def check_mc_pattern(seed: int = DEFAULT_SEED, replications: int = 200,
                         threads: Optional[int] = None) -> CheckResult:
    """Orderings and trends of the Monte Carlo RMSE table."""
    cfg = McConfig(T_list=(100, 500), lags_report=(0, 4, 20, 40, 80), replications=replications,
                   seed=seed)
    tab = run_experiment(cfg, threads=threads)
    e = tab.entries
    a = e[(500, 80, "VECM")] < 0.6 * e[(500, 80, "LVAR")]
    b = all(e[(T, 80, "LVAR")] > e[(T, 20, "LVAR")] for T in (100, 500))
    ratios = [e[(T, 80, "VECM")] / e[(T, 20, "VECM")] for T in (100, 500)]
    c = all(x <= 1.3 for x in ratios)
    d = all(e[(500, 0, k)] <= e[(100, 0, k)] for k in ("DVAR", "LVAR", "VECM"))
    detail = (f"(a) VECM {e[(500, 80, 'VECM')]:.3f} vs 0.6*LVAR {0.6 * e[(500, 80, 'LVAR')]:.3f}: {a}; "
              f"(b) LVAR lag20->80 T=100 {e[(100, 20, 'LVAR')]:.3f}->{e[(100, 80, 'LVAR')]:.3f}, "
              f"T=500 {e[(500, 20, 'LVAR')]:.3f}->{e[(500, 80, 'LVAR')]:.3f}: {b}; "
              f"(c) VECM ratios {ratios[0]:.3f}, {ratios[1]:.3f}: {c}; (d) lag-0 T=500 <= T=100: {d}")
    return CheckResult("Monte Carlo pattern", a and b and c and d, ratios[1], 1.3, detail)


@_timed
def check_subvector_predictor(n: int = 100, seed: int = DEFAULT_SEED) -> CheckResult:
    """Subvector cointegration verdicts against the rank of the zero-frequency spectrum."""
    rng = make_rng(seed, 14)
    mismatches, n_big, n_full = 0, 0, 0
    for _ in range(n):
        r = int(rng.integers(3, 7))
        q = int(rng.integers(2, r))
        c = int(rng.integers(r - q, r))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", GenericityWarning)
            spec = random_spec(rng, r, q, c, 1, 1)
        k = q - spec.d
        p = int(rng.integers(1, k + 3))
        Lam = rng.standard_normal((p, r))
        if p > 1 and rng.random() < 0.3:
            # force a rank-deficient loading block
            Lam[-1] = rng.standard_normal(p - 1) @ Lam[:-1]
        verdict = predict_subvector_cointegration(Lam, spec)
        oracle = numerical_rank(Lam @ spectral_zero(spec) @ Lam.T, 1e-9) < p
        if verdict.chi_cointegrated != oracle:
            mismatches += 1
        if p > k:
            n_big += 1
            mismatches += not verdict.chi_cointegrated
        elif p == k and numerical_rank(Lam) == p:
            n_full += 1
            mismatches += verdict.chi_cointegrated
    ok = mismatches == 0 and n_big > 0 and n_full > 0
    return CheckResult("subvector cointegration predictor", ok, float(mismatches), 0.0,
                       f"{n} draws ({n_big} with p > q-d, {n_full} full-rank p = q-d), "
                       f"mismatches {mismatches}")


RESULTANT_GRID = (-1.0, -0.5, 0.0, 0.5, 1.0)
RESULTANT_TOL = 1e-8


@_timed
def check_resultant(n: int = 500, seed: int = DEFAULT_SEED) -> CheckResult:
    """Resultant vanishes exactly for pairs sharing a root, on grid-rooted polynomials."""
    rng = make_rng(seed, 15)
    wrong, shared_count = 0, 0
    for _ in range(n):
        ra = rng.choice(RESULTANT_GRID, size=int(rng.integers(1, 5)))
        rb = rng.choice(RESULTANT_GRID, size=int(rng.integers(1, 5)))
        la = rng.choice([-1, 1]) * rng.uniform(0.5, 2.0)
        lb = rng.choice([-1, 1]) * rng.uniform(0.5, 2.0)
        a = Polynomial.from_roots(ra, la)
        b = Polynomial.from_roots(rb, lb)
        shared = float(np.min(np.abs(ra[:, None] - rb[None, :]))) == 0.0
        shared_count += shared
        predicted = abs(monic_resultant(a, b)) < RESULTANT_TOL
        wrong += predicted != shared
    ok = wrong == 0 and 0 < shared_count < n
    return CheckResult("resultant common-root test", ok, float(wrong), 0.0,
                       f"{n} pairs ({shared_count} sharing a root), misclassified {wrong}")


CHECKS: Dict[str, Callable[[], CheckResult]] = {
    "left_inverse": check_left_inverse,
    "two_variable_oracle": check_two_variable_oracle,
    "annihilation": check_annihilation,
    "pt_reconstruction": check_pt_reconstruction,
    "recursion": check_recursion,
    "irf_invariance": check_irf_invariance,
    "johansen": check_johansen,
    "mc_pattern": check_mc_pattern,
    "subvector_predictor": check_subvector_predictor,
    "resultant": check_resultant,
}


def run_all(names: Optional[List[str]] = None, threads: Optional[int] = None) -> List[CheckResult]:
    out = []
    for name in names or list(CHECKS):
        fn = CHECKS[name]
        try:
            res = fn(threads=threads) if name == "mc_pattern" else fn()
        except Exception as exc:  # a crashing check is a failed check
            res = CheckResult(name, False, float("nan"), float("nan"), f"error: {exc!r}")
        out.append(res)
    return out
