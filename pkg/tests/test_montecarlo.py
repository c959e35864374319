import math

import numpy as np
import pytest

from singcoint.exceptions import InsufficientData, SingCointError
from singcoint.model import IrfSet
from singcoint.montecarlo import (
    McConfig,
    default_fitter,
    rmse_at_lag,
    run_experiment,
    truth_fitter,
)

SMALL = dict(T_list=(60, 120), lags_report=(0, 4, 20), replications=4, seed=3)


def test_rmse_zero_for_truth():
    truth = IrfSet.from_levels(np.random.default_rng(0).standard_normal((5, 4, 3)))
    assert rmse_at_lag([truth, truth], truth, 3) == 0.0


def test_rmse_single_entry_offset():
    truth = IrfSet.from_levels(np.zeros((3, 4, 3)))
    bumped = np.zeros((3, 4, 3))
    bumped[2, 1, 2] = 0.6
    assert rmse_at_lag([IrfSet.from_levels(bumped)], truth, 2) == pytest.approx(0.6 / math.sqrt(12))


def test_rmse_rejects_empty_and_mismatched():
    truth = IrfSet.from_levels(np.zeros((3, 4, 3)))
    with pytest.raises(ValueError):
        rmse_at_lag([], truth, 0)
    with pytest.raises(ValueError):
        rmse_at_lag([IrfSet.from_levels(np.zeros((3, 4, 2)))], truth, 0)


def test_config_validation():
    with pytest.raises(ValueError):
        McConfig(replications=0)
    with pytest.raises(ValueError):
        McConfig(estimators=("DVAR", "BVAR"))
    cfg = McConfig(lags_report=(20, 0, 4))
    assert cfg.lags_report == (0, 4, 20) and cfg.horizon == 20
    assert cfg.digest() == McConfig(lags_report=(0, 4, 20)).digest()


def test_truth_injection_gives_zero():
    cfg = McConfig(T_list=(100,), replications=1, seed=1)
    table = run_experiment(cfg, fitter=truth_fitter)
    assert set(table.entries) == {(100, lag, e) for lag in cfg.lags_report for e in cfg.estimators}
    assert all(v == 0.0 for v in table.entries.values())


def test_reproducible_and_thread_independent():
    cfg = McConfig(**SMALL)
    a = run_experiment(cfg, threads=1)
    b = run_experiment(cfg, threads=1)
    c = run_experiment(cfg, threads=2)
    assert a.to_csv() == b.to_csv() == c.to_csv()
    assert a.to_markdown() == c.to_markdown()
    assert all(v >= 0 for v in a.entries.values())


def test_seed_changes_results():
    a = run_experiment(McConfig(**SMALL))
    b = run_experiment(McConfig(**{**SMALL, "seed": 4}))
    assert a.entries != b.entries


def test_table_outputs():
    table = run_experiment(McConfig(**SMALL))
    lines = table.to_csv().splitlines()
    assert lines[0] == "T,lag,estimator,rmse,n_reps,n_failures"
    assert len(lines) == 1 + 2 * 3 * 3
    assert lines[1].startswith("60,0,DVAR,")
    md = table.to_markdown()
    assert "| T | lag | DVAR | LVAR | VECM |" in md


def test_redraw_per_replication():
    cfg = McConfig(**{**SMALL, "redraw_dgp_per_run": True, "T_list": (80,)})
    table = run_experiment(cfg)
    assert table.n_reps[80] == 4


def flaky_fitter_factory():
    calls = {"n": 0}

    def fitter(name, F, cfg, draw):
        calls["n"] += 1
        if calls["n"] == 1:
            raise InsufficientData("injected failure")
        return default_fitter(name, F, cfg, draw)

    return fitter


def test_failed_replication_is_redrawn_and_counted():
    cfg = McConfig(T_list=(80,), lags_report=(0, 4), replications=3, seed=2)
    table = run_experiment(cfg, fitter=flaky_fitter_factory())
    assert table.n_failures[80] == 1 and table.n_reps[80] == 3


def always_fails(name, F, cfg, draw):
    raise InsufficientData("always")


def test_persistent_failure_aborts():
    with pytest.raises(SingCointError):
        run_experiment(McConfig(T_list=(80,), lags_report=(0,), replications=2), fitter=always_fails)


def test_failure_cap():
    calls = {"n": 0}

    def fitter(name, F, cfg, draw):
        calls["n"] += 1
        if calls["n"] <= 2:
            raise InsufficientData("injected failure")
        return truth_fitter(name, F, cfg, draw)

    # 1% of 50 replications rounds down to the minimum cap of one failure
    with pytest.raises(SingCointError, match="exceed the cap"):
        run_experiment(McConfig(T_list=(80,), lags_report=(0,), replications=50), fitter=fitter)
