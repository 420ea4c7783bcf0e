"""Reduced equations of motion and fixed-step integration.

State layout is (canonical q..., p..., noncanonical q...).  The right
hand sides are assembled symbolically once, lowered to a tape, and
stepped with classical RK4 (Euler is kept for order checks).  Observable
evolution is diagnosed by comparing finite differences along the
trajectory against dA/dt = dA/dt|_explicit + {A, H0}' at step midpoints.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._kernel import backend, compile_exprs
from .brackets import (
    Classification,
    Observable,
    bracket,
    fg_for,
    poisson_reduced,
    solve_noncanonical_velocities,
)
from .errors import NoOracleError, StepFailureError
from .expr import (
    Add,
    Expr,
    Mul,
    Neg,
    Sym,
    differentiate,
    evaluate,
    simplify,
    substitute,
)
from .hamiltonian import PartialHamiltonianSystem, momenta
from .lagrangian import CoordinatePartition, LagrangianModel, hessian
from . import linalg


@dataclass(frozen=True)
class State:
    t: float
    q_canonical: tuple
    p: tuple
    q_noncanonical: tuple

    def vector(self) -> np.ndarray:
        return np.array(
            [*self.q_canonical, *self.p, *self.q_noncanonical], dtype=np.float64
        )


@dataclass(frozen=True)
class IntegratorConfig:
    dt: float
    t_end: float
    method: str = "rk4"
    observables: tuple = ()

    def __post_init__(self) -> None:
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.method not in ("rk4", "euler"):
            raise ValueError(f"unknown method {self.method!r}")


@dataclass(eq=False)
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # (len(times), dim) in (q_can, p, q_non) layout
    symbols: tuple  # state symbols in column order
    method: str
    dt: float
    observable_values: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.times)

    def state(self, k: int, r: int) -> State:
        row = self.states[k]
        return State(
            t=float(self.times[k]),
            q_canonical=tuple(row[:r]),
            p=tuple(row[r : 2 * r]),
            q_noncanonical=tuple(row[2 * r :]),
        )


def state_symbols(system: PartialHamiltonianSystem) -> tuple:
    return (
        *system.canonical_coords,
        *system.canonical_momenta,
        *system.noncanonical_coords,
    )


def rhs_expressions(
    system: PartialHamiltonianSystem, classification: Classification
) -> list:
    """Time derivatives of the state vector as expressions."""
    pairs = system.canonical_pairs
    vel_table = solve_noncanonical_velocities(fg_for(system), classification)
    u = [vel_table[v] for v in system.noncanonical_velocities]
    out = []
    for q, _ in pairs:
        out.append(_first_order_rhs(Sym(q), system, u, pairs))
    for _, p in pairs:
        out.append(_first_order_rhs(Sym(p), system, u, pairs))
    out.extend(u)
    return out


def _first_order_rhs(A, system, u, pairs) -> Expr:
    terms = [poisson_reduced(A, system.H0, pairs)]
    for b, H_b in enumerate(system.H_alpha):
        terms.append(Mul((poisson_reduced(A, H_b, pairs), u[b])))
    return simplify(Add(tuple(terms)))


def reduced_rhs(
    system: PartialHamiltonianSystem,
    classification: Classification,
    s: State,
) -> tuple:
    """Evaluate the state derivatives at one state."""
    exprs = rhs_expressions(system, classification)
    syms = state_symbols(system)
    binding = dict(zip(syms, s.vector()))
    binding[system.model.time] = s.t
    binding.update(system.model.param_binding())
    return tuple(evaluate(e, binding) for e in exprs)


def _compile_rhs(system, classification):
    exprs = rhs_expressions(system, classification)
    param = system.model.param_binding()
    if param:
        exprs = [substitute(e, param) for e in exprs]
    inputs = (system.model.time, *state_symbols(system))
    return compile_exprs(exprs, inputs)


def integrate(
    system: PartialHamiltonianSystem,
    classification: Classification,
    init: State,
    cfg: IntegratorConfig,
) -> Trajectory:
    """Fixed-step trajectory over [init.t, cfg.t_end]."""
    span = cfg.t_end - init.t
    if span <= 0:
        raise ValueError("t_end must exceed the initial time")
    if cfg.dt > span * (1 + 1e-12):
        raise ValueError("dt exceeds the integration span")
    r = system.partition.r_W
    if (
        len(init.q_canonical) != r
        or len(init.p) != r
        or len(init.q_noncanonical) != system.model.n - r
    ):
        raise ValueError("initial state dimensions do not match the partition")
    prog = _compile_rhs(system, classification)
    y0 = init.vector()
    nfull = int(math.floor(span / cfg.dt + 1e-9))
    rem = span - nfull * cfg.dt
    method = 0 if cfg.method == "rk4" else 1

    states, done = backend.integrate(prog, y0, init.t, cfg.dt, nfull, method)
    times = init.t + cfg.dt * np.arange(nfull + 1)
    if done < nfull:
        raise StepFailureError(
            f"non-finite state at step {done + 1}",
            last_state=states[done],
            step=done + 1,
        )
    if rem > 1e-12 * max(1.0, abs(cfg.t_end)):
        tail, tdone = backend.integrate(
            prog, states[-1].copy(), float(times[-1]), rem, 1, method
        )
        if tdone < 1:
            raise StepFailureError(
                "non-finite state in the final partial step",
                last_state=states[-1],
                step=nfull + 1,
            )
        states = np.vstack([states, tail[-1]])
        times = np.append(times, cfg.t_end)

    traj = Trajectory(
        times=times,
        states=states,
        symbols=state_symbols(system),
        method=cfg.method,
        dt=cfg.dt,
    )
    for obs in cfg.observables:
        traj.observable_values[obs.name] = observable_series(obs, system, traj)
    return traj


def observable_series(
    A: Observable, system: PartialHamiltonianSystem, traj: Trajectory
) -> np.ndarray:
    expr = A.expr
    param = system.model.param_binding()
    if param:
        expr = substitute(expr, param)
    prog = compile_exprs([expr], (system.model.time, *traj.symbols))
    pts = np.column_stack([traj.times, traj.states])
    return prog.eval_many(pts)[:, 0]


@dataclass(frozen=True)
class ResidualSeries:
    residuals: np.ndarray
    max_abs: float


def evolve_observable(
    A: Observable,
    system: PartialHamiltonianSystem,
    classification: Classification,
    traj: Trajectory,
) -> ResidualSeries:
    """Finite-difference dA/dt along the trajectory minus the bracket law."""
    values = observable_series(A, system, traj)
    br = bracket(A.expr, system.H0, system, classification)
    mid_states = 0.5 * (traj.states[1:] + traj.states[:-1])
    mid_times = 0.5 * (traj.times[1:] + traj.times[:-1])
    param = system.model.param_binding()
    dAdt = differentiate(A.expr, system.model.time)
    if isinstance(br, Expr):
        rhs = simplify(Add((dAdt, br)))
        if param:
            rhs = substitute(rhs, param)
        prog = compile_exprs([rhs], (system.model.time, *traj.symbols))
        rhs_vals = prog.eval_many(np.column_stack([mid_times, mid_states]))[:, 0]
    else:
        # bracket only evaluable per point (noncanonical block above the
        # symbolic-inverse limit)
        rhs_vals = np.empty(len(mid_times))
        for k in range(len(mid_times)):
            binding = dict(zip(traj.symbols, mid_states[k]))
            binding[system.model.time] = float(mid_times[k])
            binding.update(param)
            rhs_vals[k] = br.evaluate(binding) + evaluate(dAdt, binding)
    dts = np.diff(traj.times)
    fd = np.diff(values) / dts
    residuals = fd - rhs_vals
    return ResidualSeries(
        residuals=residuals,
        max_abs=float(np.max(np.abs(residuals))) if len(residuals) else 0.0,
    )


# --------------------------------------------------------------------------
# oracles
# --------------------------------------------------------------------------

def _closed_form_S1(init: State, times: np.ndarray) -> np.ndarray:
    # first-order oscillator: q1' = q2, q2' = -q1; no canonical sector
    q1, q2 = init.q_noncanonical[:2]
    rel = times - times[0]
    c, s = np.cos(rel), np.sin(rel)
    cols = [q1 * c + q2 * s, q2 * c - q1 * s]
    for extra in init.q_noncanonical[2:]:
        cols.append(np.full_like(times, extra))
    return np.column_stack(cols)


def _closed_form_G1(init: State, times: np.ndarray) -> np.ndarray:
    # free particle plus a gauge-fixed spectator
    q1 = init.q_canonical[0]
    p1 = init.p[0]
    rel = times - times[0]
    return np.column_stack(
        [q1 + p1 * rel, np.full_like(times, p1)]
        + [np.full_like(times, v) for v in init.q_noncanonical]
    )


CLOSED_FORMS = {
    "S1": _closed_form_S1,
    "S2": _closed_form_S1,  # spectator coordinates stay constant
    "G1": _closed_form_G1,
}


def euler_lagrange_rhs(model: LagrangianModel) -> list:
    """Second-order equations solved for the accelerations (regular models).

    d/dt(dL/dv_A) = dL/dq_A expands to W q_ddot = dL/dq - (d2L/dv dq) v
    - d2L/dv dt; the Hessian is inverted exactly.
    """
    n = model.n
    W = hessian(model)
    Winv = linalg.symbolic_inverse(W)
    first = [differentiate(model.lagrangian, v) for v in model.velocities]
    rhs = []
    for a in range(n):
        terms = [differentiate(model.lagrangian, model.coordinates[a])]
        for b in range(n):
            terms.append(
                Neg(
                    Mul(
                        (
                            differentiate(first[a], model.coordinates[b]),
                            Sym(model.velocities[b]),
                        )
                    )
                )
            )
        terms.append(Neg(differentiate(first[a], model.time)))
        rhs.append(simplify(Add(tuple(terms))))
    return linalg.mat_vec(Winv, rhs)


def oracle_trajectory(
    model: LagrangianModel,
    tag: str,
    init: State,
    cfg: IntegratorConfig,
    partition: CoordinatePartition | None = None,
) -> Trajectory:
    """Reference trajectory: closed form if registered, else the
    Euler-Lagrange equations integrated directly (regular models only)."""
    span = cfg.t_end - init.t
    nfull = int(math.floor(span / cfg.dt + 1e-9))
    rem = span - nfull * cfg.dt
    times = init.t + cfg.dt * np.arange(nfull + 1)
    if rem > 1e-12 * max(1.0, abs(cfg.t_end)):
        times = np.append(times, cfg.t_end)

    if tag in CLOSED_FORMS:
        states = CLOSED_FORMS[tag](init, times)
        return Trajectory(
            times=times, states=states, symbols=(), method="closed-form", dt=cfg.dt
        )

    r = len(init.q_canonical)
    if r != model.n:
        raise NoOracleError(f"no closed form registered for singular model {tag!r}")

    # regular: integrate (q, v) second order, then map v -> p exactly
    accel = euler_lagrange_rhs(model)
    param = model.param_binding()
    if param:
        accel = [substitute(e, param) for e in accel]
    vel_exprs = [Sym(v) for v in model.velocities]
    prog = compile_exprs(
        vel_exprs + accel, (model.time, *model.coordinates, *model.velocities)
    )
    # initial velocities from p via the solved momentum map
    part = partition or CoordinatePartition(tuple(range(model.n)), ())
    from .hamiltonian import solve_canonical_velocities

    p_defs = momenta(model, part)
    solved = solve_canonical_velocities(model, part, p_defs)
    binding = dict(zip(model.coordinates, init.q_canonical))
    binding.update(dict(zip(model.momenta, init.p)))
    binding[model.time] = init.t
    binding.update(param)
    v0 = [evaluate(s, binding) for s in solved]

    y0 = np.array([*init.q_canonical, *v0])
    states_qv, done = backend.integrate(prog, y0, init.t, cfg.dt, nfull, 0)
    if done < nfull:
        raise StepFailureError("oracle integration failed", step=done + 1)
    if len(times) == nfull + 2:
        tail, tdone = backend.integrate(
            prog, states_qv[-1].copy(), float(times[-2]), rem, 1, 0
        )
        if tdone < 1:
            raise StepFailureError("oracle integration failed in final step")
        states_qv = np.vstack([states_qv, tail[-1]])

    # map (q, v) -> (q, p) along the trajectory
    p_exprs = [substitute(p, param) for p in p_defs] if param else list(p_defs)
    p_prog = compile_exprs(
        p_exprs, (model.time, *model.coordinates, *model.velocities)
    )
    pts = np.column_stack([times, states_qv])
    p_vals = p_prog.eval_many(pts)
    states = np.column_stack([states_qv[:, : model.n], p_vals])
    return Trajectory(
        times=times,
        states=states,
        symbols=(*model.coordinates, *model.momenta),
        method="euler-lagrange",
        dt=cfg.dt,
    )


# --------------------------------------------------------------------------
# CSV export
# --------------------------------------------------------------------------

def write_csv(
    traj: Trajectory,
    stream,
    model: LagrangianModel,
    partition: CoordinatePartition,
) -> None:
    """Header t, coordinates (original order), canonical momenta, observables."""
    r = partition.r_W
    n = model.n
    col_of = {}
    for pos, i in enumerate(partition.canonical):
        col_of[i] = pos
    for pos, i in enumerate(partition.noncanonical):
        col_of[i] = 2 * r + pos
    headers = ["t"]
    headers += [c.name for c in model.coordinates]
    headers += [model.momenta[i].name for i in partition.canonical]
    obs_names = list(traj.observable_values)
    headers += [f"obs:{name}" for name in obs_names]
    stream.write(",".join(headers) + "\n")
    for k in range(len(traj)):
        row = [f"{traj.times[k]:.17g}"]
        for i in range(n):
            row.append(f"{traj.states[k][col_of[i]]:.17g}")
        for pos in range(r):
            row.append(f"{traj.states[k][r + pos]:.17g}")
        for name in obs_names:
            row.append(f"{traj.observable_values[name][k]:.17g}")
        stream.write(",".join(row) + "\n")
