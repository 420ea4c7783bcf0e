"""End-to-end analysis: Hessian -> partition -> Hamiltonians -> F/G ->
classification -> constraints -> correspondence -> multi-time counting."""

from __future__ import annotations

import os
from dataclasses import dataclass, field

from .brackets import (
    Classification,
    FGSystem,
    INCONSISTENT,
    classify,
    fg_for,
    solve_noncanonical_velocities,
)
from .dirac import ConstraintSet, CorrespondenceReport, build_constraints, verify_correspondence
from .expr import render
from .hamiltonian import PartialHamiltonianSystem, build_system, verify_nondynamical
from .lagrangian import (
    CoordinatePartition,
    HessianReport,
    LagrangianModel,
    SamplingConfig,
    rank_and_partition,
)
from .multitime import MultiTimeSystem, from_partial

DEFAULT_SEED = 42


def default_seed() -> int:
    env = os.environ.get("SINGMECH_SEED")
    if env:
        try:
            return int(env)
        except ValueError:
            pass
    return DEFAULT_SEED


@dataclass(frozen=True)
class AnalysisConfig:
    seed: int = DEFAULT_SEED
    samples: int = 16
    threshold: float = 1e-10
    tol: float = 1e-10

    @staticmethod
    def from_sampling(sampling: SamplingConfig, seed: int | None = None) -> "AnalysisConfig":
        return AnalysisConfig(
            seed=seed if seed is not None else sampling.seed,
            samples=sampling.samples,
            threshold=sampling.threshold,
        )


@dataclass(eq=False)
class AnalysisResult:
    model: LagrangianModel
    config: AnalysisConfig
    hessian_report: HessianReport
    partition: CoordinatePartition
    system: PartialHamiltonianSystem
    fg: FGSystem
    classification: Classification
    velocities: dict = field(default_factory=dict)
    constraints: ConstraintSet | None = None
    correspondence: CorrespondenceReport | None = None
    multitime: MultiTimeSystem | None = None


def analyze(model: LagrangianModel, config: AnalysisConfig | None = None) -> AnalysisResult:
    config = config or AnalysisConfig()
    sampling = SamplingConfig(
        samples=config.samples, seed=config.seed, threshold=config.threshold
    )
    report, partition = rank_and_partition(model, sampling)
    system = build_system(model, partition, tol=config.tol, seed=config.seed)
    verify_nondynamical(system, tol=config.tol, seed=config.seed)
    fg = fg_for(system)
    classification = classify(
        fg,
        seed=config.seed,
        samples=config.samples,
        threshold=config.threshold,
        tol=config.tol,
    )
    result = AnalysisResult(
        model=model,
        config=config,
        hessian_report=report,
        partition=partition,
        system=system,
        fg=fg,
        classification=classification,
    )
    if classification.consistent:
        result.velocities = solve_noncanonical_velocities(fg, classification)
    result.constraints = build_constraints(system)
    result.correspondence = verify_correspondence(
        system, fg, classification, tol=config.tol, seed=config.seed
    )
    result.multitime = from_partial(system)
    return result


def report_dict(result: AnalysisResult) -> dict:
    """JSON-ready report; every expression is rendered in parseable form."""
    model = result.model
    part = result.partition
    system = result.system
    cls = result.classification
    coords = [c.name for c in model.coordinates]
    report = {
        "model": {
            "name": model.name,
            "coordinates": coords,
            "n": model.n,
            "lagrangian": render(model.lagrangian),
            "parameters": dict(model.parameters),
        },
        "sampling": {
            "seed": result.config.seed,
            "samples": result.config.samples,
            "threshold": result.config.threshold,
            "tolerance": result.config.tol,
        },
        "hessian": {
            "rank": result.hessian_report.r_W,
            "entries": [[render(x) for x in row] for row in result.hessian_report.W],
            "permutation": list(result.hessian_report.permutation),
            "canonical": [c.name for c in part.canonical_coords(model)],
            "noncanonical": [c.name for c in part.noncanonical_coords(model)],
            "degeneracy_case": system.degeneracy_case,
        },
        "partial_hamiltonian": {
            "H0": render(system.H0),
            "H_alpha": {
                c.name: render(h)
                for c, h in zip(system.noncanonical_coords, system.H_alpha)
            },
            "momenta": {
                p.name: render(d)
                for p, d in zip(system.canonical_momenta, system.momenta_defs)
            },
            "solved_velocities": {
                v.name: render(s)
                for v, s in zip(system.canonical_velocities, system.solved_velocities)
            },
            "time_dependent": system.time_dependent,
        },
        "fg": {
            "F": [[render(x) for x in row] for row in result.fg.F],
            "G": [render(g) for g in result.fg.G],
        },
        "classification": {
            "verdict": cls.verdict,
            "r_F": cls.r_F,
            "alpha1": [system.noncanonical_coords[a].name for a in cls.alpha1],
            "alpha2": [system.noncanonical_coords[a].name for a in cls.alpha2],
            "lambda": [[render(x) for x in row] for row in cls.lam] if cls.lam else [],
            "gauge_fixed": [v.name for v in cls.gauge_fixed],
            "consistency_residuals": [render(r) for r in cls.residuals],
            "witness": _witness_dict(cls.witness),
        },
        "velocities": {v.name: render(e) for v, e in result.velocities.items()},
        "constraints": {
            "Phi": {
                c.name: render(phi)
                for c, phi in zip(
                    system.noncanonical_coords, result.constraints.Phi
                )
            }
            if result.constraints
            else {}
        },
        "correspondence": {
            "F_matches_constraint_bracket": result.correspondence.F_matches,
            "G_matches_constraint_bracket": result.correspondence.G_matches,
            "multiplier_system_consistent": result.correspondence.multiplier_consistent,
            "multiplier_residuals": [
                render(r) for r in result.correspondence.multiplier_residuals
            ],
            "witness": _witness_dict(result.correspondence.witness),
        }
        if result.correspondence
        else {},
        "multitime": {
            "n_times": result.multitime.n_times,
            "times": [t.name for t in result.multitime.taus],
            "times_momenta_rule": result.multitime.n_times + part.r_W == model.n + 1,
            "times_rank_rule": result.multitime.n_times
            + result.hessian_report.r_W
            == model.n + 1,
        }
        if result.multitime
        else {},
    }
    return report


def _witness_dict(witness) -> dict | None:
    if witness is None:
        return None
    return {s.name: float(v) for s, v in sorted(witness.items(), key=lambda kv: kv[0].name)}


def exit_code_for(result: AnalysisResult) -> int:
    return 1 if result.classification.verdict == INCONSISTENT else 0
