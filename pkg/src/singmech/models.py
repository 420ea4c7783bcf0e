"""Bundled example models.

R   regular 2D oscillator (nondegenerate Hessian)
S1  first-order oscillator L = q1_dot*q2 - (q1^2 + q2^2)/2 (nongauge)
S2  S1 with a spectator coordinate q3 (gauge, rank-2 F)
G1  free particle with a spectator coordinate (pure gauge)
G2  L = (q1_dot - q2)^2/2, inconsistent at generic points

plus two directly specified multi-time systems for integrability tests.
"""

from __future__ import annotations

from .expr import Const, Div, Pow, Sym, Symbol
from .lagrangian import LagrangianModel, build_model
from .multitime import MultiTimeSystem, direct

MODEL_SOURCES = {
    "R": {
        "coordinates": ["q1", "q2"],
        "lagrangian": "(q1_dot^2 + q2_dot^2)/2 - (q1^2 + q2^2)/2",
    },
    "S1": {
        "coordinates": ["q1", "q2"],
        "lagrangian": "q1_dot*q2 - (q1^2 + q2^2)/2",
    },
    "S2": {
        "coordinates": ["q1", "q2", "q3"],
        "lagrangian": "q1_dot*q2 - (q1^2 + q2^2)/2",
    },
    "G1": {
        "coordinates": ["q1", "q2"],
        "lagrangian": "q1_dot^2/2",
    },
    "G2": {
        "coordinates": ["q1", "q2"],
        "lagrangian": "(q1_dot - q2)^2/2",
    },
}


def bundled_model(name: str) -> LagrangianModel:
    spec = MODEL_SOURCES[name]
    return build_model(name, spec["coordinates"], spec["lagrangian"])


def model_R() -> LagrangianModel:
    return bundled_model("R")


def model_S1() -> LagrangianModel:
    return bundled_model("S1")


def model_S2() -> LagrangianModel:
    return bundled_model("S2")


def model_G1() -> LagrangianModel:
    return bundled_model("G1")


def model_G2() -> LagrangianModel:
    return bundled_model("G2")


def mt_drift() -> MultiTimeSystem:
    """Integrable pair (p^2/2, p) on one canonical pair."""
    q = Symbol("q", "coordinate")
    p = Symbol("p_q", "momentum")
    taus = (Symbol("tau0", "time"), Symbol("tau1", "time"))
    h0 = Div(Pow(Sym(p), 2), Const(2))
    h1 = Sym(p)
    return direct([h0, h1], taus, [(q, p)])


def mt_shear() -> MultiTimeSystem:
    """Nonintegrable pair (p^2/2, q): the flows do not commute."""
    q = Symbol("q", "coordinate")
    p = Symbol("p_q", "momentum")
    taus = (Symbol("tau0", "time"), Symbol("tau1", "time"))
    h0 = Div(Pow(Sym(p), 2), Const(2))
    h1 = Sym(q)
    return direct([h0, h1], taus, [(q, p)])


MULTITIME_SOURCES = {
    "mt-drift": mt_drift,
    "mt-shear": mt_shear,
}
