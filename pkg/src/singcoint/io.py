"""
Reading and writing model documents and result tables.

Matrix documents are JSON objects. A plain matrix is a list of rows; a
polynomial matrix is a list of coefficient matrices, lowest power first
(``[coeff][row][col]``). Floats are written with ``repr`` precision so a
rerun with the same inputs produces byte-identical files.

Family spec keys: ``r, q, c, xi, eta, D, E, S`` and optional ``gamma_u``.
``E`` and ``S`` may be given as a single matrix, read as a constant
polynomial.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Dict, Optional, Union

import numpy as np

from singcoint.exceptions import ShapeError
from singcoint.model import GrangerRep, I1FamilySpec, IrfSet, PtDecomp
from singcoint.polymat import PolyMatrix

SPEC_KEYS = ("r", "q", "c", "xi", "eta", "D", "E", "S", "gamma_u")
PathLike = Union[str, Path]


def _poly(obj) -> PolyMatrix:
    arr = np.asarray(obj, dtype=float)
    if arr.ndim == 2:
        arr = arr[None]
    if arr.ndim != 3:
        raise ShapeError("a polynomial matrix must be a list of coefficient matrices")
    return PolyMatrix(arr)


def spec_from_dict(d: dict) -> I1FamilySpec:
    unknown = sorted(set(d) - set(SPEC_KEYS))
    if unknown:
        raise ValueError(f"unknown spec keys {unknown}; valid keys: {list(SPEC_KEYS)}")
    missing = [k for k in SPEC_KEYS[:-1] if k not in d]
    if missing:
        raise ValueError(f"spec is missing keys {missing}")
    r, q = int(d["r"]), int(d["q"])
    return I1FamilySpec(
        r=r, q=q, c=int(d["c"]),
        xi=np.asarray(d["xi"], dtype=float),
        eta=np.asarray(d["eta"], dtype=float),
        D=np.asarray(d["D"], dtype=float),
        E=_poly(d["E"]),
        S=_poly(d["S"]),
        gamma_u=None if d.get("gamma_u") is None else np.asarray(d["gamma_u"], dtype=float),
    )


def spec_to_dict(spec: I1FamilySpec) -> dict:
    return {
        "r": spec.r, "q": spec.q, "c": spec.c,
        "xi": spec.xi.tolist(), "eta": spec.eta.tolist(), "D": spec.D.tolist(),
        "E": spec.E.to_json(), "S": spec.S.to_json(), "gamma_u": spec.gamma_u.tolist(),
    }


def rep_to_dict(rep: GrangerRep) -> dict:
    """Error-correction document: ``A, A_star, alpha, beta, h, C0`` (plus ``k`` and ``N`` when known)."""
    out = {
        "A": rep.A.to_json(),
        "A_star": rep.A_star.to_json(),
        "alpha": rep.alpha.tolist(),
        "beta": rep.beta.tolist(),
        "h": rep.h.tolist(),
        "k": rep.k.tolist(),
        "C0": rep.C0.tolist(),
    }
    if rep.N is not None:
        out["N"] = rep.N.to_json()
    return out


def pt_to_dict(pt: PtDecomp) -> dict:
    return {
        "G1": None if pt.G1 is None else pt.G1.to_json(),
        "G2": pt.G2.to_json(),
        "xi": pt.xi.tolist(),
        "eta_perp": pt.eta_perp.tolist(),
        "n_permanent": pt.n_permanent,
        "n_transitory": pt.n_transitory,
    }


def estimate_to_dict(est) -> dict:
    """Structured document for a ``VarEstimate`` or ``VecmEstimate``."""
    out: Dict[str, object] = {"type": type(est).__name__}
    for name, val in vars(est).items():
        if name == "residuals":
            continue
        if isinstance(val, np.ndarray):
            out[name] = val.tolist()
        elif isinstance(val, (int, float, str)) or val is None:
            out[name] = val
    return out


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def write_json(path: PathLike, obj) -> Path:
    path = Path(path)
    path.write_text(dumps(obj))
    return path


def read_json(path: PathLike) -> dict:
    with open(path) as fh:
        return json.load(fh)


def _fmt(x: float) -> str:
    return repr(float(x))


def table_csv(header, rows) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(v if isinstance(v, str) else _fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def path_csv(F: np.ndarray, u: np.ndarray) -> str:
    """Columns ``t, F1..Fr, u1..uq`` with ``t`` starting at 1."""
    r, q = F.shape[1], u.shape[1]
    header = ["t"] + [f"F{i + 1}" for i in range(r)] + [f"u{j + 1}" for j in range(q)]
    rows = ([str(t + 1)] + list(F[t]) + list(u[t]) for t in range(F.shape[0]))
    return table_csv(header, rows)


def panel_csv(x: np.ndarray) -> str:
    """Columns ``t, x1..xn``."""
    header = ["t"] + [f"x{i + 1}" for i in range(x.shape[1])]
    return table_csv(header, ([str(t + 1)] + list(x[t]) for t in range(x.shape[0])))


def irf_csv(irf: IrfSet, levels: bool = True) -> str:
    """Columns ``lag, response_i_shock_j`` (1-based ``i``, ``j``)."""
    coeffs = irf.level_coeffs if levels else irf.diff_coeffs
    _, r, q = coeffs.shape
    header = ["lag"] + [f"response_{i + 1}_shock_{j + 1}" for i in range(r) for j in range(q)]
    return table_csv(header, ([str(h)] + list(coeffs[h].ravel()) for h in range(coeffs.shape[0])))


def read_table_csv(path: PathLike) -> np.ndarray:
    """Numeric body of a CSV written by this module."""
    return np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
