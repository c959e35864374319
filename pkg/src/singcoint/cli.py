"""
Command-line interface.

Every command reads an optional JSON config (``--config``); command-line
flags override config values. Unknown config keys are rejected. Failures
exit with a nonzero status and a one-line JSON error record on stderr.

Commands and outputs (under ``--out``, default ``.``):

``simulate``  path.csv (and panel.csv when a panel is configured)
``granger``   granger.json with ``A, A_star, alpha, beta, h, k, C0, N``
``irf``       irf.csv, theoretical or estimated level responses
``ptdecomp``  ptdecomp.json with ``G1, G2, xi``
``mc``        table1.csv and table1.md
``verify``    verify.json; one PASS/FAIL line per check on stdout
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import warnings
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from singcoint import io
from singcoint.estimate import ESTIMATORS, fit_estimator
from singcoint.exceptions import GenericityWarning
from singcoint.model import DEFAULT_HORIZON, granger_rep, pt_decompose, theoretical_irf
from singcoint.montecarlo import McConfig, default_threads, run_experiment
from singcoint.simulate import (
    DEFAULT_BURN_IN,
    PanelSpec,
    dgp_to_spec,
    draw_dgp,
    simulate_factors,
    simulate_panel,
)
from singcoint.verify import CHECKS, run_all

COMMON_KEYS = ("seed", "out", "threads")  # accepted by every command
COMMAND_KEYS: Dict[str, tuple] = {
    "simulate": ("spec", "dgp_seed", "T", "burn_in", "k", "panel"),
    "granger": ("spec", "dgp_seed", "max_degree", "k"),
    "irf": ("spec", "dgp_seed", "H", "estimator", "T", "burn_in"),
    "ptdecomp": ("spec", "dgp_seed"),
    "mc": tuple(McConfig.__dataclass_fields__),
    "verify": ("checks",),
}
PANEL_KEYS = ("Lambda", "idio_order", "idio_ar", "idio_scale")


class ConfigError(ValueError):
    pass


def _check_keys(cfg: dict, valid: Sequence[str], where: str) -> None:
    unknown = sorted(set(cfg) - set(valid))
    if unknown:
        raise ConfigError(f"unknown {where} keys {unknown}; valid keys: {sorted(set(valid))}")


def load_config(command: str, path: Optional[str], overrides: dict) -> dict:
    cfg = {}
    if path:
        cfg = io.read_json(path)
        if not isinstance(cfg, dict):
            raise ConfigError("config file must hold a JSON object")
    cfg.update({k: v for k, v in overrides.items() if v is not None})
    valid = COMMON_KEYS + COMMAND_KEYS[command]
    _check_keys(cfg, valid, f"'{command}' config")
    if path and isinstance(cfg.get("spec"), str):
        spec_path = Path(cfg["spec"])
        if not spec_path.is_absolute() and not spec_path.exists():
            cfg["spec"] = str(Path(path).parent / spec_path)
    return cfg


def _spec_and_rep(cfg: dict, need_rep: bool = True):
    """Family spec and (optionally) its error-correction form from ``spec`` or the DGP."""
    if cfg.get("spec") is not None:
        raw = cfg["spec"]
        spec = io.spec_from_dict(io.read_json(raw) if isinstance(raw, str) else raw)
        rep = None
        if need_rep:
            k = cfg.get("k")
            rep = granger_rep(spec, max_degree=cfg.get("max_degree"),
                              k=None if k is None else np.asarray(k, dtype=float))
        return spec, rep
    seed = cfg.get("dgp_seed", cfg.get("seed", 0))
    return dgp_to_spec(draw_dgp(int(seed)))


def _out_dir(cfg: dict) -> Path:
    out = Path(cfg.get("out") or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_simulate(cfg: dict) -> List[Path]:
    spec, rep = _spec_and_rep(cfg)
    seed = int(cfg.get("seed", 0))
    path = simulate_factors(rep, int(cfg.get("T", 500)), burn_in=int(cfg.get("burn_in", DEFAULT_BURN_IN)),
                            seed=seed, stream=0)
    out = _out_dir(cfg)
    written = [out / "path.csv"]
    written[0].write_text(io.path_csv(path.F, path.u))
    if cfg.get("panel") is not None:
        pcfg = dict(cfg["panel"])
        _check_keys(pcfg, PANEL_KEYS, "panel")
        panel = PanelSpec(**pcfg)
        x = simulate_panel(path, panel, seed=seed, stream=1)
        written.append(out / "panel.csv")
        written[1].write_text(io.panel_csv(x))
    return written


def cmd_granger(cfg: dict) -> List[Path]:
    _, rep = _spec_and_rep(cfg)
    return [io.write_json(_out_dir(cfg) / "granger.json", io.rep_to_dict(rep))]


def cmd_irf(cfg: dict) -> List[Path]:
    H = int(cfg.get("H", DEFAULT_HORIZON))
    estimator = cfg.get("estimator")
    if estimator is None:
        spec, _ = _spec_and_rep(cfg, need_rep=False)
        irf = theoretical_irf(spec, H)
    else:
        if estimator not in ESTIMATORS:
            raise ConfigError(f"estimator must be one of {list(ESTIMATORS)}")
        spec, rep = _spec_and_rep(cfg)
        path = simulate_factors(rep, int(cfg.get("T", 500)), burn_in=int(cfg.get("burn_in", DEFAULT_BURN_IN)),
                                seed=int(cfg.get("seed", 0)), stream=0)
        lags = rep.A.degree
        irf = fit_estimator(estimator, path.F, spec.q, spec.c, max(lags, 1), H)
    out = _out_dir(cfg) / "irf.csv"
    out.write_text(io.irf_csv(irf))
    return [out]


def cmd_ptdecomp(cfg: dict) -> List[Path]:
    spec, _ = _spec_and_rep(cfg, need_rep=False)
    return [io.write_json(_out_dir(cfg) / "ptdecomp.json", io.pt_to_dict(pt_decompose(spec)))]


def cmd_mc(cfg: dict) -> List[Path]:
    fields = {k: v for k, v in cfg.items() if k in McConfig.__dataclass_fields__}
    mc = McConfig(**fields)
    threads = cfg.get("threads")
    table = run_experiment(mc, threads=None if threads is None else int(threads))
    out = _out_dir(cfg)
    (out / "table1.csv").write_text(table.to_csv())
    (out / "table1.md").write_text(table.to_markdown())
    return [out / "table1.csv", out / "table1.md"]


def cmd_verify(cfg: dict) -> int:
    names = cfg.get("checks") or list(CHECKS)
    bad = sorted(set(names) - set(CHECKS))
    if bad:
        raise ConfigError(f"unknown checks {bad}; valid: {list(CHECKS)}")
    threads = cfg.get("threads")
    results = run_all(names, threads=None if threads is None else int(threads))
    for res in results:
        print(res.line())
    passed = sum(r.passed for r in results)
    print(f"{passed}/{len(results)} checks passed")
    if cfg.get("out"):
        report = [{"name": r.name, "passed": bool(r.passed), "value": r.value,
                   "threshold": r.threshold, "detail": r.detail} for r in results]
        io.write_json(_out_dir(cfg) / "verify.json", report)
    return 0 if passed == len(results) else 1


COMMANDS = {
    "simulate": cmd_simulate,
    "granger": cmd_granger,
    "irf": cmd_irf,
    "ptdecomp": cmd_ptdecomp,
    "mc": cmd_mc,
    "verify": cmd_verify,
}


def _int_list(text: str) -> List[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="singcoint", description=__doc__.split("\n\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--seed", type=int)
        p.add_argument("--out", help="output directory (default: current directory)")
        p.add_argument("--threads", type=int,
                       help="worker processes (default: $SINGCOINT_THREADS or 1)")
        if name in ("simulate", "granger", "irf", "ptdecomp"):
            p.add_argument("--spec", help="family spec JSON (default: the simulation DGP)")
        if name in ("simulate", "irf"):
            p.add_argument("--T", type=int, dest="T", help="sample length")
        if name == "mc":
            p.add_argument("--T", type=_int_list, dest="T_list", help="comma-separated sample sizes")
            p.add_argument("--reps", type=int, dest="replications", help="replications per sample size")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    overrides = {k: v for k, v in vars(args).items() if k not in ("command", "config", "verbose")}
    try:
        cfg = load_config(args.command, args.config, overrides)
        if args.command == "mc" and "threads" not in cfg:
            cfg["threads"] = default_threads()
        with warnings.catch_warnings():
            warnings.simplefilter("default", GenericityWarning)
            result = COMMANDS[args.command](cfg)
        if isinstance(result, int):
            return result
        for path in result:
            print(path)
        return 0
    except Exception as exc:
        record = {"command": args.command, "error": type(exc).__name__, "message": str(exc)}
        print(json.dumps(record), file=sys.stderr)
        return 2 if isinstance(exc, ConfigError) else 1


if __name__ == "__main__":
    sys.exit(main())
