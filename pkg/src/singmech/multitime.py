"""Multi-time dynamics: several generalized times, one Hamiltonian each.

A nondynamical partial-Hamiltonian system maps onto this picture by
promoting the noncanonical coordinates to times: tau^0 = t with H0, and
tau^mu = q^a with the matching additional Hamiltonian.  The counting
rules n_times + n_momenta = n + 1 and (for the singular pipeline)
n_times + rank(W) = n + 1 hold structurally.  Evolution along a path in
time-space is path independent exactly when the antisymmetric residual

    R_mn = dH_m/dtau^n - dH_n/dtau^m + {H_m, H_n}

vanishes; staircase path pairs witness either outcome.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ._kernel import backend, compile_exprs
from .brackets import poisson_reduced
from .errors import StepFailureError
from .expr import (
    Add,
    Const,
    Expr,
    Mul,
    Neg,
    Sym,
    Symbol,
    differentiate,
    is_zero,
    simplify,
    substitute,
)
from .hamiltonian import PartialHamiltonianSystem
from .sampling import PointSampler


@dataclass(frozen=True, eq=False)
class MultiTimeSystem:
    taus: tuple  # time symbols, tau^0 first
    hamiltonians: tuple  # one expression per time
    pairs: tuple  # canonical (q, p) symbol pairs
    parameters: dict
    source: PartialHamiltonianSystem | None = None

    @property
    def n_times(self) -> int:
        return len(self.taus)

    @property
    def state_symbols(self) -> tuple:
        return tuple(q for q, _ in self.pairs) + tuple(p for _, p in self.pairs)


def from_partial(system: PartialHamiltonianSystem) -> MultiTimeSystem:
    """Promote the noncanonical coordinates to generalized times."""
    model = system.model
    taus = (model.time, *system.noncanonical_coords)
    hams = (system.H0, *system.H_alpha)
    mts = MultiTimeSystem(
        taus=taus,
        hamiltonians=hams,
        pairs=system.canonical_pairs,
        parameters=dict(model.parameters),
        source=system,
    )
    n = model.n
    n_p = system.partition.r_W
    if mts.n_times + n_p != n + 1:
        raise AssertionError("times-momenta counting rule violated")
    # the pipeline pins the momentum count to the Hessian rank, so the
    # times-rank rule is the same statement
    if mts.n_times + system.partition.r_W != n + 1:
        raise AssertionError("times-rank counting rule violated")
    return mts


def direct(
    hamiltonians: Sequence[Expr],
    taus: Sequence[Symbol],
    pairs: Sequence[tuple],
    parameters: dict | None = None,
) -> MultiTimeSystem:
    """Build a multi-time system from explicitly given Hamiltonians."""
    if len(hamiltonians) != len(taus):
        raise ValueError("one Hamiltonian per generalized time")
    return MultiTimeSystem(
        taus=tuple(taus),
        hamiltonians=tuple(simplify(h) for h in hamiltonians),
        pairs=tuple(pairs),
        parameters=dict(parameters or {}),
    )


def integrability_residual(mts: MultiTimeSystem) -> list:
    """Antisymmetric matrix R_mn; all-zero means integrable."""
    k = mts.n_times
    R = [[Const(0)] * k for _ in range(k)]
    for m in range(k):
        for n in range(m + 1, k):
            entry = simplify(
                Add(
                    (
                        differentiate(mts.hamiltonians[m], mts.taus[n]),
                        Neg(differentiate(mts.hamiltonians[n], mts.taus[m])),
                        poisson_reduced(
                            mts.hamiltonians[m], mts.hamiltonians[n], mts.pairs
                        ),
                    )
                )
            )
            R[m][n] = entry
            R[n][m] = simplify(Neg(entry))
    return R


def residual_verdicts(
    mts: MultiTimeSystem, tol: float = 1e-10, seed: int = 42
) -> list:
    sampler = PointSampler(seed=seed)
    fixed = {Symbol(k, "parameter"): v for k, v in mts.parameters.items()}
    R = integrability_residual(mts)
    return [
        [is_zero(R[m][n], sampler=sampler, tol=tol, fixed=fixed).kind for n in range(mts.n_times)]
        for m in range(mts.n_times)
    ]


def is_integrable(mts: MultiTimeSystem, tol: float = 1e-10, seed: int = 42) -> bool:
    verdicts = residual_verdicts(mts, tol=tol, seed=seed)
    return all(kind != "nonzero" for row in verdicts for kind in row)


@dataclass(frozen=True)
class TimePath:
    """Piecewise-linear path through time-space."""

    waypoints: tuple  # tuple of coordinate tuples

    def __post_init__(self) -> None:
        if len(self.waypoints) < 2:
            raise ValueError("a path needs at least two waypoints")
        dims = {len(w) for w in self.waypoints}
        if len(dims) != 1:
            raise ValueError("waypoints must share a dimension")

    @property
    def dimension(self) -> int:
        return len(self.waypoints[0])


def load_path(path) -> TimePath:
    """One waypoint per line, comma-separated components."""
    waypoints = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            waypoints.append(tuple(float(x) for x in line.split(",")))
    return TimePath(waypoints=tuple(waypoints))


def integrate_path(
    mts: MultiTimeSystem,
    path: TimePath,
    init: Sequence[float],
    steps_per_segment: int = 1000,
) -> np.ndarray:
    """RK4 along the path parameter of each linear segment.

    The state is the canonical (q..., p...) vector; on each segment the
    flow is the delta-weighted sum of the per-time Hamiltonian fields.
    """
    if path.dimension != mts.n_times:
        raise ValueError(
            f"path dimension {path.dimension} != number of times {mts.n_times}"
        )
    syms = mts.state_symbols
    y = np.array(init, dtype=np.float64)
    if len(y) != len(syms):
        raise ValueError(f"initial state needs {len(syms)} components")
    if not syms:
        return y  # no canonical sector: nothing evolves

    # flow fields {y, H_m} per time direction, symbolic once
    fields = []
    for H in mts.hamiltonians:
        fields.append([poisson_reduced(Sym(s), H, mts.pairs) for s in syms])

    param_bind = {Symbol(k, "parameter"): v for k, v in mts.parameters.items()}
    s_sym = Symbol("_path_s", "parameter")
    for a, b in zip(path.waypoints, path.waypoints[1:]):
        deltas = [bb - aa for aa, bb in zip(a, b)]
        if all(d == 0 for d in deltas):
            continue
        tau_sub = {
            tau: Add((Const(float(aa)), Mul((Const(float(d)), Sym(s_sym)))))
            for tau, aa, d in zip(mts.taus, a, deltas)
        }
        rhs = []
        for i in range(len(syms)):
            terms = []
            for mu, d in enumerate(deltas):
                if d == 0:
                    continue
                terms.append(Mul((Const(float(d)), fields[mu][i])))
            expr = simplify(Add(tuple(terms))) if terms else Const(0)
            expr = substitute(expr, tau_sub)
            if param_bind:
                expr = substitute(expr, param_bind)
            rhs.append(expr)
        prog = compile_exprs(rhs, (s_sym, *syms))
        states, done = backend.integrate(
            prog, y, 0.0, 1.0 / steps_per_segment, steps_per_segment, 0
        )
        if done < steps_per_segment:
            raise StepFailureError(
                "non-finite state during path integration", last_state=states[done]
            )
        y = states[-1].copy()
    return y


def staircase_path(start, end, rng) -> TimePath:
    """Axis-parallel path from start to end; order and chunking randomized."""
    n = len(start)
    moves = []
    for mu in range(n):
        delta = end[mu] - start[mu]
        if delta == 0:
            continue
        chunks = int(rng.integers(1, 3))
        for _ in range(chunks):
            moves.append((mu, delta / chunks))
    order = rng.permutation(len(moves))
    current = list(start)
    waypoints = [tuple(current)]
    for k in order:
        mu, step = moves[k]
        current[mu] += step
        waypoints.append(tuple(current))
    if len(waypoints) == 1:
        waypoints.append(tuple(current))
    return TimePath(waypoints=tuple(waypoints))


def endpoint_spread(
    mts: MultiTimeSystem,
    paths: Sequence[TimePath],
    init: Sequence[float],
    steps_per_segment: int = 1000,
) -> tuple[list, float]:
    """Endpoints per path and the largest pairwise max-norm difference."""
    ends = [integrate_path(mts, p, init, steps_per_segment) for p in paths]
    spread = 0.0
    for i in range(len(ends)):
        for j in range(i + 1, len(ends)):
            if len(ends[i]):
                spread = max(spread, float(np.max(np.abs(ends[i] - ends[j]))))
    return ends, spread
