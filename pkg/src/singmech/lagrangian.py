"""Lagrangian models, velocity Hessians, and the canonical split.

The Hessian W_AB = d2L/dv_A dv_B is computed exactly; its rank (sampled
at seeded random states, full pivoting) fixes how many coordinates get
conjugate momenta.  A permutation brings a nonsingular principal minor
of size rank to the front: those coordinates are "canonical", the rest
are carried without momenta.
"""

from __future__ import annotations

import keyword
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from . import linalg
from .errors import ModelValidationError, UnsupportedLagrangianError
from .expr import Expr, Symbol, differentiate, free_symbols, simplify
from .parser import parse
from .sampling import PointSampler

TIME_NAME = "t"


def velocity_name(coord: str) -> str:
    return coord + "_dot"


def momentum_name(coord: str) -> str:
    return "p_" + coord


@dataclass(frozen=True, eq=False)
class LagrangianModel:
    """A named coordinate list with a Lagrangian over (t, q, q_dot)."""

    name: str
    coordinates: tuple
    velocities: tuple
    momenta: tuple
    time: Symbol
    lagrangian: Expr
    parameters: Mapping[str, float]
    param_symbols: tuple

    @property
    def n(self) -> int:
        return len(self.coordinates)

    def velocity_of(self, coord: Symbol) -> Symbol:
        return self.velocities[self.coordinates.index(coord)]

    def momentum_of(self, coord: Symbol) -> Symbol:
        return self.momenta[self.coordinates.index(coord)]

    def param_binding(self) -> dict:
        return {s: float(self.parameters[s.name]) for s in self.param_symbols}

    def lagrangian_context(self) -> dict:
        ctx = {c.name: c for c in self.coordinates}
        ctx.update({v.name: v for v in self.velocities})
        ctx[self.time.name] = self.time
        ctx.update({p.name: p for p in self.param_symbols})
        return ctx

    def observable_context(self) -> dict:
        """Symbols allowed in observables: coordinates, momenta, time, parameters."""
        ctx = {c.name: c for c in self.coordinates}
        ctx.update({m.name: m for m in self.momenta})
        ctx[self.time.name] = self.time
        ctx.update({p.name: p for p in self.param_symbols})
        return ctx


def _check_name(name: str) -> None:
    if not name.isidentifier() or keyword.iskeyword(name):
        raise ModelValidationError(f"bad coordinate name {name!r}")


def build_model(
    name: str,
    coordinates: Sequence[str],
    lagrangian: str,
    parameters: Mapping[str, float] | None = None,
) -> LagrangianModel:
    """Validate names, register symbols, and parse the Lagrangian."""
    parameters = dict(parameters or {})
    if not coordinates:
        raise ModelValidationError("model needs at least one coordinate")
    if len(set(coordinates)) != len(coordinates):
        dup = sorted({c for c in coordinates if list(coordinates).count(c) > 1})
        raise ModelValidationError(f"duplicate coordinate(s): {', '.join(dup)}")
    reserved = {TIME_NAME}
    for c in coordinates:
        _check_name(c)
        if c in reserved:
            raise ModelValidationError(f"coordinate name {c!r} is reserved")
    derived = set()
    for c in coordinates:
        derived.update((velocity_name(c), momentum_name(c)))
    clash = derived & set(coordinates)
    if clash:
        raise ModelValidationError(
            f"coordinate name(s) collide with derived symbols: {', '.join(sorted(clash))}"
        )
    bad_params = (set(parameters) & set(coordinates)) | (set(parameters) & derived) | (
        set(parameters) & reserved
    )
    if bad_params:
        raise ModelValidationError(
            f"parameter name(s) collide with model symbols: {', '.join(sorted(bad_params))}"
        )

    coords = tuple(Symbol(c, "coordinate") for c in coordinates)
    vels = tuple(Symbol(velocity_name(c), "velocity") for c in coordinates)
    moms = tuple(Symbol(momentum_name(c), "momentum") for c in coordinates)
    time = Symbol(TIME_NAME, "time")
    params = tuple(Symbol(p, "parameter") for p in sorted(parameters))

    ctx = {s.name: s for s in (*coords, *vels, time, *params)}
    lag = simplify(parse(lagrangian, ctx))
    return LagrangianModel(
        name=name,
        coordinates=coords,
        velocities=vels,
        momenta=moms,
        time=time,
        lagrangian=lag,
        parameters=parameters,
        param_symbols=params,
    )


@dataclass(frozen=True)
class SamplingConfig:
    samples: int = 16
    seed: int = 42
    threshold: float = 1e-10


@dataclass(frozen=True, eq=False)
class HessianReport:
    W: list  # n x n expressions
    r_W: int
    permutation: tuple  # original coordinate indices, canonical block first
    samples_used: int
    pivot_threshold: float
    seed: int


@dataclass(frozen=True)
class CoordinatePartition:
    """Index split after reordering: canonical first, noncanonical after."""

    canonical: tuple  # positions into model.coordinates
    noncanonical: tuple

    @property
    def r_W(self) -> int:
        return len(self.canonical)

    @property
    def n(self) -> int:
        return len(self.canonical) + len(self.noncanonical)

    def canonical_coords(self, model: LagrangianModel) -> tuple:
        return tuple(model.coordinates[i] for i in self.canonical)

    def noncanonical_coords(self, model: LagrangianModel) -> tuple:
        return tuple(model.coordinates[i] for i in self.noncanonical)


def hessian(model: LagrangianModel) -> list:
    """W_AB = d2L/dv_A dv_B; rejects velocity-cubic or worse Lagrangians."""
    n = model.n
    W = [[None] * n for _ in range(n)]
    first = [differentiate(model.lagrangian, v) for v in model.velocities]
    for a in range(n):
        for b in range(a, n):
            entry = differentiate(first[a], model.velocities[b])
            vel_deps = free_symbols(entry) & set(model.velocities)
            if vel_deps:
                raise UnsupportedLagrangianError(
                    "Hessian entry W[%d][%d] still depends on %s; Lagrangian must be "
                    "at most quadratic in the velocities"
                    % (a, b, ", ".join(sorted(s.name for s in vel_deps)))
                )
            W[a][b] = entry
            W[b][a] = entry
    return W


def _hessian_samples(
    model: LagrangianModel, W: list, config: SamplingConfig
) -> list[np.ndarray]:
    sampler = PointSampler(seed=config.seed, samples=config.samples)
    return linalg.sample_matrices(W, model.param_binding(), sampler, config.samples)


def rank_and_partition(
    model: LagrangianModel, config: SamplingConfig = SamplingConfig()
) -> tuple[HessianReport, CoordinatePartition]:
    """Sampled constant rank of W and the reordering that leads with it.

    The momentum count is pinned to the Hessian rank, so the noncanonical
    sector never acquires constraints.
    """
    W = hessian(model)
    samples = _hessian_samples(model, W, config)
    r, lead, rest = linalg.principal_partition(samples, config.threshold)
    report = HessianReport(
        W=W,
        r_W=r,
        permutation=lead + rest,
        samples_used=len(samples),
        pivot_threshold=config.threshold,
        seed=config.seed,
    )
    return report, CoordinatePartition(canonical=lead, noncanonical=rest)
