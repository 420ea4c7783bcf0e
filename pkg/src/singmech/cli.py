"""Command-line interface.

Subcommands: analyze, simulate, verify, multitime, compare.
Exit codes: 0 success, 1 model-level rejection (inconsistent,
unsupported, non-constant rank), 2 verification failure, 3 parse or
validation error.  JSON output has a stable key order; CSV uses 17
significant digits.  SINGMECH_SEED overrides the default seed 42.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__
from .brackets import Observable
from .checks import run_checks
from .dynamics import (
    IntegratorConfig,
    State,
    integrate,
    observable_series,
    oracle_trajectory,
    write_csv,
)
from .errors import (
    ExprSyntaxError,
    InconsistentSystemError,
    ModelValidationError,
    NoOracleError,
    NonConstantRankError,
    NondynamicalViolationError,
    SingmechError,
    SingularMinorError,
    StepFailureError,
    UnknownSymbolError,
    UnsupportedLagrangianError,
)
from .expr import evaluate, render
from .modelfile import load_model, load_multitime
from .multitime import endpoint_spread, from_partial, is_integrable, load_path, residual_verdicts
from .parser import parse
from .pipeline import AnalysisConfig, analyze, default_seed, exit_code_for, report_dict

EXIT_OK = 0
EXIT_MODEL = 1
EXIT_VERIFY = 2
EXIT_PARSE = 3

_PARSE_ERRORS = (ModelValidationError, ExprSyntaxError, UnknownSymbolError)
_MODEL_ERRORS = (
    UnsupportedLagrangianError,
    NonConstantRankError,
    SingularMinorError,
    NondynamicalViolationError,
    InconsistentSystemError,
    NoOracleError,
    StepFailureError,
)


def _emit(payload: dict, indent: int | None = 2) -> None:
    sys.stdout.write(json.dumps(payload, indent=indent) + "\n")


def _diagnostic(kind: str, exc: Exception) -> dict:
    return {"error": kind, "message": str(exc)}


def _add_seed_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=None, help="sampling seed")
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--threshold", type=float, default=None)
    p.add_argument("--tol", type=float, default=None)


def _config(args, sampling) -> AnalysisConfig:
    """File-level sampling config, overridden by explicit flags."""
    seed = args.seed if args.seed is not None else default_seed()
    return AnalysisConfig(
        seed=seed,
        samples=args.samples if getattr(args, "samples", None) is not None else sampling.samples,
        threshold=args.threshold
        if getattr(args, "threshold", None) is not None
        else sampling.threshold,
        tol=args.tol if getattr(args, "tol", None) is not None else 1e-10,
    )


def _parse_init(items) -> dict:
    out: dict = {}
    for item in items or []:
        for piece in item.split(","):
            piece = piece.strip()
            if not piece:
                continue
            if "=" not in piece:
                raise ModelValidationError(f"bad --init entry {piece!r} (want name=value)")
            name, value = piece.split("=", 1)
            try:
                out[name.strip()] = float(value)
            except ValueError:
                raise ModelValidationError(f"bad --init value for {name!r}: {value!r}") from None
    return out


def _initial_state(model, system, init_values: dict) -> State:
    """Assemble (q, p, q_noncanonical); momenta derive from velocities."""
    known_names = {c.name for c in model.coordinates}
    vel_names = {v.name for v in model.velocities}
    mom_names = {m.name for m in model.momenta}
    for name in init_values:
        if name not in known_names | vel_names | mom_names and name != model.time.name:
            raise ModelValidationError(f"--init names unknown symbol {name!r}")
    missing = [c.name for c in model.coordinates if c.name not in init_values]
    if missing:
        raise ModelValidationError(
            "missing initial values for coordinate(s): " + ", ".join(missing)
        )
    t0 = init_values.get(model.time.name, 0.0)
    binding = {model.time: t0}
    binding.update(model.param_binding())
    for c in model.coordinates:
        binding[c] = init_values[c.name]
    for v in model.velocities:
        if v.name in init_values:
            binding[v] = init_values[v.name]

    p_vals = []
    for sym, p_def in zip(system.canonical_momenta, system.momenta_defs):
        if sym.name in init_values:
            p_vals.append(init_values[sym.name])
            continue
        from .expr import free_symbols

        needed = free_symbols(p_def)
        missing_vel = sorted(
            s.name for s in needed if s.kind == "velocity" and s not in binding
        )
        if missing_vel:
            raise ModelValidationError(
                f"initializing {sym.name} needs velocity value(s): "
                + ", ".join(missing_vel)
            )
        p_vals.append(evaluate(p_def, binding))
    return State(
        t=t0,
        q_canonical=tuple(binding[c] for c in system.canonical_coords),
        p=tuple(p_vals),
        q_noncanonical=tuple(binding[c] for c in system.noncanonical_coords),
    )


def cmd_analyze(args) -> int:
    model, sampling = load_model(args.model)
    config = _config(args, sampling)
    try:
        result = analyze(model, config)
    except _MODEL_ERRORS as exc:
        _emit(_diagnostic(type(exc).__name__, exc))
        return EXIT_MODEL
    _emit(report_dict(result))
    return exit_code_for(result)


def cmd_simulate(args) -> int:
    model, sampling = load_model(args.model)
    config = AnalysisConfig.from_sampling(
        sampling, seed=args.seed if args.seed is not None else default_seed()
    )
    try:
        result = analyze(model, config)
        if not result.classification.consistent:
            raise InconsistentSystemError(
                "cannot simulate an inconsistent model"
            )
        init_values = _parse_init(args.init)
        if args.t0 is not None:
            init_values[model.time.name] = args.t0
        init = _initial_state(model, result.system, init_values)
        observables = []
        for spec in args.observable or []:
            if "=" in spec:
                name, text = spec.split("=", 1)
            else:
                name, text = spec, spec
            expr = parse(text, result.system.observable_context())
            observables.append(Observable(name=name.strip(), expr=expr))
        cfg = IntegratorConfig(
            dt=args.dt,
            t_end=args.t1,
            method=args.method,
            observables=tuple(observables),
        )
        traj = integrate(result.system, result.classification, init, cfg)
    except _MODEL_ERRORS as exc:
        _emit(_diagnostic(type(exc).__name__, exc))
        return EXIT_MODEL
    except ValueError as exc:
        _emit(_diagnostic("InvalidConfig", exc))
        return EXIT_MODEL

    out = open(args.out, "w") if args.out else sys.stdout
    try:
        write_csv(traj, out, model, result.partition)
    finally:
        if args.out:
            out.close()

    diagnostics = {"steps": len(traj) - 1, "method": traj.method}
    h0_series = observable_series(
        Observable("H0", result.system.H0), result.system, traj
    )
    diagnostics["h0_drift"] = float(np.max(np.abs(h0_series - h0_series[0])))
    from .dynamics import evolve_observable

    residuals = {}
    for obs in observables:
        residuals[obs.name] = evolve_observable(
            obs, result.system, result.classification, traj
        ).max_abs
    diagnostics["observable_residuals"] = residuals
    sys.stderr.write(json.dumps(diagnostics) + "\n")
    return EXIT_OK


def cmd_verify(args) -> int:
    import dataclasses

    model, sampling = load_model(args.model)
    config = AnalysisConfig.from_sampling(
        sampling, seed=args.seed if args.seed is not None else default_seed()
    )
    if args.samples is not None:
        config = dataclasses.replace(config, samples=args.samples)
    try:
        result = analyze(model, config)
        checks = run_checks(result, seed=config.seed, tol=args.tol)
    except _MODEL_ERRORS as exc:
        _emit(_diagnostic(type(exc).__name__, exc))
        return EXIT_MODEL
    payload = {
        "model": model.name,
        "verdict": result.classification.verdict,
        "checks": [
            {
                "name": c.name,
                "passed": c.passed,
                "detail": c.detail,
                "witness": {getattr(k, "name", str(k)): v for k, v in c.witness.items()}
                if c.witness
                else None,
            }
            for c in checks
        ],
        "passed": all(c.passed for c in checks),
    }
    _emit(payload)
    return EXIT_OK if payload["passed"] else EXIT_VERIFY


def cmd_multitime(args) -> int:
    try:
        if args.hamiltonians:
            mts = load_multitime(args.hamiltonians)
        else:
            if not args.model:
                raise ModelValidationError("need a model file or --hamiltonians")
            model, sampling = load_model(args.model)
            config = AnalysisConfig.from_sampling(
                sampling, seed=args.seed if args.seed is not None else default_seed()
            )
            result = analyze(model, config)
            mts = result.multitime or from_partial(result.system)
        paths = [load_path(p) for p in args.path or []]
        for p in paths:
            if p.dimension != mts.n_times:
                raise ModelValidationError(
                    f"path dimension {p.dimension} != n_times {mts.n_times}"
                )
        init_vals = _parse_init(args.init)
        init = []
        for s in mts.state_symbols:
            if s.name not in init_vals:
                raise ModelValidationError(f"missing initial value for {s.name}")
            init.append(init_vals[s.name])
        ends, spread = endpoint_spread(mts, paths, init, args.steps)
        integrable = is_integrable(mts)
    except ValueError as exc:
        _emit(_diagnostic("InvalidInput", exc))
        return EXIT_MODEL
    except _MODEL_ERRORS as exc:
        _emit(_diagnostic(type(exc).__name__, exc))
        return EXIT_MODEL
    payload = {
        "n_times": mts.n_times,
        "times": [t.name for t in mts.taus],
        "hamiltonians": [render(h) for h in mts.hamiltonians],
        "integrable": integrable,
        "residual_verdicts": residual_verdicts(mts),
        "paths": [
            {
                "file": str(f),
                "endpoint": {
                    s.name: float(v) for s, v in zip(mts.state_symbols, e)
                },
            }
            for f, e in zip(args.path or [], ends)
        ],
        "max_pairwise_difference": spread,
    }
    _emit(payload)
    return EXIT_OK


def cmd_compare(args) -> int:
    model, sampling = load_model(args.model)
    config = AnalysisConfig.from_sampling(
        sampling, seed=args.seed if args.seed is not None else default_seed()
    )
    try:
        result = analyze(model, config)
        if not result.classification.consistent:
            raise InconsistentSystemError("cannot simulate an inconsistent model")
        init = _initial_state(model, result.system, _parse_init(args.init))
        cfg = IntegratorConfig(dt=args.dt, t_end=args.t1)
        traj = integrate(result.system, result.classification, init, cfg)
        oracle = oracle_trajectory(
            model, model.name, init, cfg, partition=result.partition
        )
    except _MODEL_ERRORS as exc:
        _emit(_diagnostic(type(exc).__name__, exc))
        return EXIT_MODEL
    k = min(traj.states.shape[1], oracle.states.shape[1])
    diff = np.abs(traj.states[:, :k] - oracle.states[:, :k])
    payload = {
        "model": model.name,
        "oracle": oracle.method,
        "points": len(traj),
        "max_difference": float(np.max(diff)) if diff.size else 0.0,
        "per_column": {
            (traj.symbols[i].name if i < len(traj.symbols) else f"col{i}"): float(
                np.max(diff[:, i])
            )
            for i in range(k)
        },
    }
    _emit(payload)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="singmech",
        description="Constraint-free analysis of singular Lagrangian systems",
    )
    ap.add_argument("--version", action="version", version=f"singmech {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="full pipeline report as JSON")
    p.add_argument("model")
    _add_seed_args(p)
    p.set_defaults(fn=cmd_analyze)

    p = sub.add_parser("simulate", help="integrate the reduced equations, CSV out")
    p.add_argument("model")
    p.add_argument("--t0", type=float, default=None)
    p.add_argument("--t1", type=float, required=True)
    p.add_argument("--dt", type=float, required=True)
    p.add_argument("--init", action="append", metavar="k=v[,k=v...]")
    p.add_argument("--observable", action="append", metavar="[name=]expr")
    p.add_argument("--method", choices=("rk4", "euler"), default="rk4")
    p.add_argument("--out", default=None)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("verify", help="property suite, JSON report")
    p.add_argument("model")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--tol", type=float, default=1e-8)
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("multitime", help="path integration and integrability")
    p.add_argument("model", nargs="?")
    p.add_argument("--hamiltonians", default=None, help="multi-time system file")
    p.add_argument("--path", action="append", help="waypoint file (repeatable)")
    p.add_argument("--init", action="append", metavar="k=v[,k=v...]")
    p.add_argument("--steps", type=int, default=1000, help="steps per segment")
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(fn=cmd_multitime)

    p = sub.add_parser("compare", help="reduced dynamics vs oracle trajectory")
    p.add_argument("model")
    p.add_argument("--t1", type=float, required=True)
    p.add_argument("--dt", type=float, required=True)
    p.add_argument("--init", action="append", metavar="k=v[,k=v...]")
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(fn=cmd_compare)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except _PARSE_ERRORS as exc:
        _emit(_diagnostic(type(exc).__name__, exc))
        return EXIT_PARSE
    except SingmechError as exc:
        _emit(_diagnostic(type(exc).__name__, exc))
        return EXIT_MODEL


if __name__ == "__main__":
    sys.exit(main())
