"""Plain-text model files (INI style).

    [model]
    name = S1
    coordinates = q1, q2
    lagrangian = q1_dot*q2 - (q1^2 + q2^2)/2

    [parameters]
    k = 1.0

    [sampling]
    seed = 42
    samples = 16
    threshold = 1e-10

Multi-time systems use a [multitime] section with ``canonical``,
``times``, and one ``h<i>`` key per generalized time.
"""

from __future__ import annotations

import configparser

from .errors import ModelValidationError
from .expr import Symbol
from .lagrangian import LagrangianModel, SamplingConfig, build_model, momentum_name
from .multitime import MultiTimeSystem, direct
from .parser import parse


def _split_list(text: str) -> list[str]:
    parts = [p.strip() for p in text.replace(",", " ").split()]
    return [p for p in parts if p]


def _read(path) -> configparser.ConfigParser:
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str  # keep case
    try:
        with open(path) as fh:
            cp.read_file(fh, source=str(path))
    except OSError as exc:
        raise ModelValidationError(f"cannot read model file: {exc}") from None
    except configparser.Error as exc:
        raise ModelValidationError(f"malformed model file: {exc}") from None
    return cp


def load_model(path) -> tuple[LagrangianModel, SamplingConfig]:
    """Parse, validate, and register a Lagrangian model from a file."""
    cp = _read(path)
    if not cp.has_section("model"):
        raise ModelValidationError("model file needs a [model] section")
    sec = cp["model"]
    for key in ("name", "coordinates", "lagrangian"):
        if key not in sec:
            raise ModelValidationError(f"[model] section is missing {key!r}")
    parameters = {}
    if cp.has_section("parameters"):
        for key, value in cp["parameters"].items():
            try:
                parameters[key] = float(value)
            except ValueError:
                raise ModelValidationError(
                    f"parameter {key!r} is not a number: {value!r}"
                ) from None
    model = build_model(
        sec["name"], _split_list(sec["coordinates"]), sec["lagrangian"], parameters
    )
    sampling = SamplingConfig()
    if cp.has_section("sampling"):
        s = cp["sampling"]
        sampling = SamplingConfig(
            samples=int(s.get("samples", sampling.samples)),
            seed=int(s.get("seed", sampling.seed)),
            threshold=float(s.get("threshold", sampling.threshold)),
        )
    return model, sampling


def load_multitime(path) -> MultiTimeSystem:
    """Directly specified multi-time system."""
    cp = _read(path)
    if not cp.has_section("multitime"):
        raise ModelValidationError("file needs a [multitime] section")
    sec = cp["multitime"]
    for key in ("canonical", "times"):
        if key not in sec:
            raise ModelValidationError(f"[multitime] section is missing {key!r}")
    coord_names = _split_list(sec["canonical"])
    tau_names = _split_list(sec["times"])
    if len(set(tau_names)) != len(tau_names):
        raise ModelValidationError("duplicate time names")
    coords = [Symbol(c, "coordinate") for c in coord_names]
    moms = [Symbol(momentum_name(c), "momentum") for c in coord_names]
    taus = [Symbol(t, "time") for t in tau_names]
    parameters = {}
    if cp.has_section("parameters"):
        parameters = {k: float(v) for k, v in cp["parameters"].items()}
    ctx = {s.name: s for s in (*coords, *moms, *taus)}
    ctx.update({p: Symbol(p, "parameter") for p in parameters})
    hams = []
    for i in range(len(taus)):
        key = f"h{i}"
        if key not in sec:
            raise ModelValidationError(f"[multitime] section is missing {key!r}")
        hams.append(parse(sec[key], ctx))
    return direct(hams, taus, list(zip(coords, moms)), parameters)
