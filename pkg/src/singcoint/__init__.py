"""Singular cointegrated I(1) factor processes: representation, simulation, estimation."""

from singcoint.polymat import PolyMatrix, Polynomial, left_inverse, is_zeroless, resultant
from singcoint.model import I1FamilySpec, GrangerRep, granger_rep, pt_decompose, theoretical_irf
from singcoint.simulate import DgpDraw, SimPath, PanelSpec, draw_dgp, dgp_to_spec, simulate_factors

__version__ = "0.1.0"

__all__ = [
    "PolyMatrix", "Polynomial", "left_inverse", "is_zeroless", "resultant",
    "I1FamilySpec", "GrangerRep", "granger_rep", "pt_decompose", "theoretical_irf",
    "DgpDraw", "SimPath", "PanelSpec", "draw_dgp", "dgp_to_spec", "simulate_factors",
]
