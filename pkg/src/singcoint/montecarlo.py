"""
Monte Carlo comparison of impulse-response estimators.

For every sample size and replication a factor path is simulated from one
fixed draw of the VAR(2) truth, the DVAR, LVAR and VECM are fitted, shocks are
identified recursively, and the squared errors of the level responses are
accumulated per reported lag.

Replication ``i`` at sample size ``T`` draws its shocks from the stream
``(seed, 1, T, i, attempt)``, so results do not depend on the number of
worker processes. Per-replication errors are summed in replication order.
"""

from __future__ import annotations

import hashlib
import io
import json
import logging
import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from singcoint.estimate import ESTIMATORS, fit_estimator
from singcoint.exceptions import EstimationWarning, SingCointError
from singcoint.model import IrfSet, levels_irf
from singcoint.simulate import DEFAULT_BURN_IN, DgpDraw, draw_dgp, dgp_to_spec, simulate_factors

log = logging.getLogger(__name__)

THREADS_ENV = "SINGCOINT_THREADS"
MAX_ATTEMPTS = 20


@dataclass
class McConfig:
    r: int = 4
    q: int = 3
    c: int = 3
    T_list: Tuple[int, ...] = (100, 500, 1000, 5000)
    lags_report: Tuple[int, ...] = (0, 4, 20, 40, 80)
    replications: int = 1000
    estimators: Tuple[str, ...] = ESTIMATORS
    var_lag_order: Dict[str, int] = field(default_factory=lambda: {"DVAR": 2, "LVAR": 2, "VECM": 2})
    seed: int = 0
    redraw_dgp_per_run: bool = False
    burn_in: int = DEFAULT_BURN_IN
    det_spec: str = "none"

    def __post_init__(self):
        self.T_list = tuple(int(t) for t in self.T_list)
        self.lags_report = tuple(sorted(int(h) for h in self.lags_report))
        self.estimators = tuple(self.estimators)
        self.var_lag_order = {**{"DVAR": 2, "LVAR": 2, "VECM": 2}, **dict(self.var_lag_order)}
        if self.replications < 1:
            raise ValueError("replications must be at least 1")
        if not self.T_list or min(self.T_list) < 1:
            raise ValueError("T_list must contain positive sample sizes")
        if not self.lags_report or self.lags_report[0] < 0:
            raise ValueError("lags_report must contain nonnegative lags")
        unknown = set(self.estimators) - set(ESTIMATORS)
        if unknown:
            raise ValueError(f"unknown estimators {sorted(unknown)}; valid: {list(ESTIMATORS)}")

    @property
    def horizon(self) -> int:
        return self.lags_report[-1]

    def to_dict(self) -> dict:
        d = asdict(self)
        d["T_list"] = list(self.T_list)
        d["lags_report"] = list(self.lags_report)
        d["estimators"] = list(self.estimators)
        return d

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


@dataclass
class McTable:
    """RMSE keyed by ``(T, lag, estimator)`` plus replication bookkeeping per ``T``."""

    entries: Dict[Tuple[int, int, str], float]
    n_reps: Dict[int, int]
    n_failures: Dict[int, int]
    seed: int
    config_digest: str
    config: Optional[McConfig] = None

    def rmse(self, T: int, lag: int, estimator: str) -> float:
        return self.entries[(T, lag, estimator)]

    def keys_sorted(self) -> List[Tuple[int, int, str]]:
        order = {e: i for i, e in enumerate(ESTIMATORS)}
        return sorted(self.entries, key=lambda k: (k[0], k[1], order.get(k[2], 99)))

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("T,lag,estimator,rmse,n_reps,n_failures\n")
        for T, lag, est in self.keys_sorted():
            buf.write(f"{T},{lag},{est},{self.entries[(T, lag, est)]:.10g},{self.n_reps[T]},{self.n_failures[T]}\n")
        return buf.getvalue()

    def to_markdown(self) -> str:
        Ts = sorted(self.n_reps)
        lags = sorted({k[1] for k in self.entries})
        ests = [e for e in ESTIMATORS if any(k[2] == e for k in self.entries)]
        lines = [f"RMSE of level impulse responses (seed {self.seed}, config {self.config_digest})", ""]
        lines.append("| T | lag | " + " | ".join(ests) + " |")
        lines.append("|---|---|" + "---|" * len(ests))
        for T in Ts:
            for lag in lags:
                vals = " | ".join(f"{self.entries[(T, lag, e)]:.2f}" for e in ests)
                lines.append(f"| {T} | {lag} | {vals} |")
        lines.append("")
        lines.append("Replications (failures redrawn): " + ", ".join(
            f"T={T}: {self.n_reps[T]} ({self.n_failures[T]})" for T in Ts))
        return "\n".join(lines) + "\n"


def rmse_at_lag(est_irfs: Sequence[IrfSet], truth: IrfSet, lag: int) -> float:
    """Root mean squared error of the level responses at ``lag``, pooled over replications and entries."""
    if len(est_irfs) == 0:
        raise ValueError("no impulse responses to compare")
    target = truth.level_coeffs[lag]
    total = 0.0
    for irf in est_irfs:
        diff = irf.level_coeffs[lag] - target
        if diff.shape != target.shape:
            raise ValueError(f"response shape {diff.shape} differs from truth {target.shape}")
        total += float(np.sum(diff ** 2))
    return math.sqrt(total / (len(est_irfs) * target.size))


def _dgp_seed(seed: int, rep: int) -> int:
    return int(np.random.SeedSequence([seed, 2, rep]).generate_state(1)[0])


def truth_for(draw: DgpDraw, H: int) -> IrfSet:
    return levels_irf(draw.A, draw.C0, H)


# fitter(name, F, cfg, draw) -> IrfSet; the default fits the named estimator
Fitter = Callable[[str, np.ndarray, McConfig, DgpDraw], IrfSet]


def default_fitter(name: str, F: np.ndarray, cfg: McConfig, draw: DgpDraw) -> IrfSet:
    return fit_estimator(name, F, cfg.q, cfg.c, cfg.var_lag_order[name], cfg.horizon, cfg.det_spec)


def truth_fitter(name: str, F: np.ndarray, cfg: McConfig, draw: DgpDraw) -> IrfSet:
    """Test hook returning the true responses for every estimator."""
    return truth_for(draw, cfg.horizon)


def _replicate(cfg: McConfig, T: int, rep: int, base_draw: Optional[DgpDraw], fitter: Fitter):
    """Squared-error sums per estimator and reported lag for one replication, plus failed attempts."""
    draw = base_draw if base_draw is not None else draw_dgp(_dgp_seed(cfg.seed, rep), cfg.r, cfg.q, cfg.c)
    truth = truth_for(draw, cfg.horizon).level_coeffs[list(cfg.lags_report)]
    _, rep_truth = dgp_to_spec(draw)
    failures = 0
    for attempt in range(MAX_ATTEMPTS):
        path = simulate_factors(rep_truth, T, burn_in=cfg.burn_in, seed=cfg.seed,
                                stream=_stream(T, rep, attempt))
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", EstimationWarning)
                sq = {}
                for name in cfg.estimators:
                    irf = fitter(name, path.F, cfg, draw)
                    diff = irf.level_coeffs[list(cfg.lags_report)] - truth
                    sq[name] = np.sum(diff ** 2, axis=(1, 2))
                    if not np.all(np.isfinite(sq[name])):
                        raise SingCointError(f"{name} produced non-finite responses")
            return sq, failures
        except (SingCointError, np.linalg.LinAlgError, ValueError) as exc:
            failures += 1
            log.info("replication %d at T=%d failed (%s); redrawing", rep, T, exc)
    raise SingCointError(f"replication {rep} at T={T} failed {MAX_ATTEMPTS} times")


def _stream(T: int, rep: int, attempt: int) -> int:
    # fold (T, rep, attempt) into a single 64-bit stream id
    return int(np.random.SeedSequence([1, T, rep, attempt]).generate_state(1, np.uint64)[0])


def _run_chunk(args):
    cfg, T, reps, base_draw, fitter = args
    return [(rep,) + _replicate(cfg, T, rep, base_draw, fitter) for rep in reps]


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def run_experiment(cfg: McConfig, threads: Optional[int] = None, fitter: Optional[Fitter] = None) -> McTable:
    """Run the full experiment; ``threads > 1`` spreads replications over worker processes."""
    threads = default_threads() if threads is None else max(1, int(threads))
    fitter = fitter or default_fitter
    base_draw = None if cfg.redraw_dgp_per_run else draw_dgp(cfg.seed, cfg.r, cfg.q, cfg.c)
    if base_draw is not None:
        dgp_to_spec(base_draw)  # raises InconsistentDraw early
    cap = max(1, int(0.01 * cfg.replications))
    entries: Dict[Tuple[int, int, str], float] = {}
    n_reps: Dict[int, int] = {}
    n_fail: Dict[int, int] = {}
    for T in cfg.T_list:
        reps = list(range(cfg.replications))
        if threads == 1:
            results = _run_chunk((cfg, T, reps, base_draw, fitter))
        else:
            size = max(1, math.ceil(len(reps) / (4 * threads)))
            chunks = [reps[i : i + size] for i in range(0, len(reps), size)]
            with ProcessPoolExecutor(max_workers=threads) as pool:
                parts = pool.map(_run_chunk, [(cfg, T, ch, base_draw, fitter) for ch in chunks])
                results = [item for part in parts for item in part]
        results.sort(key=lambda item: item[0])
        failures = sum(item[2] for item in results)
        if failures > cap:
            raise SingCointError(f"{failures} failed replications at T={T} exceed the cap of {cap}")
        n_reps[T] = len(results)
        n_fail[T] = failures
        size = cfg.r * cfg.q
        for name in cfg.estimators:
            total = np.zeros(len(cfg.lags_report))
            for _, sq, _ in results:
                total = total + sq[name]
            for lag, val in zip(cfg.lags_report, total):
                entries[(T, lag, name)] = math.sqrt(val / (len(results) * size))
    return McTable(entries=entries, n_reps=n_reps, n_failures=n_fail, seed=cfg.seed,
                   config_digest=cfg.digest(), config=cfg)
