"""Constraint picture on the fully extended phase space.

Giving the noncanonical coordinates momenta p_a forces the primary
constraints Phi_a = p_a + H_a = 0.  This module rebuilds that picture
and checks the correspondence identities against the reduced one:
F_ab equals the full bracket {Phi_a, Phi_b}, D_a H0 equals
{H0, Phi_a} (up to the explicit-time term of H_a), and the multiplier
system for the total Hamiltonian reproduces the velocity solve.  For
invertible F the Dirac bracket built from the constraints coincides
with the nongauge bracket on extra-momentum-free observables.
"""

from __future__ import annotations

from dataclasses import dataclass

from .brackets import (
    Classification,
    FGSystem,
    _as_phase_expr,
    poisson_reduced,
    solve_noncanonical_velocities,
)
from .errors import SecondClassRequiredError
from .expr import (
    Add,
    Expr,
    Mul,
    Neg,
    Sym,
    Symbol,
    differentiate,
    is_zero,
    simplify,
)
from .hamiltonian import PartialHamiltonianSystem
from .sampling import PointSampler
from . import linalg


def full_pairs(model) -> tuple:
    return tuple(zip(model.coordinates, model.momenta))


def poisson_full(a, b, model) -> Expr:
    """Poisson bracket over all n canonical pairs of the extended space."""
    return poisson_reduced(_as_phase_expr(a), _as_phase_expr(b), full_pairs(model))


@dataclass(frozen=True, eq=False)
class ConstraintSet:
    system: PartialHamiltonianSystem
    Phi: tuple  # p_a + H_a per noncanonical coordinate

    @property
    def extra_momenta(self) -> tuple:
        model = self.system.model
        return tuple(model.momenta[i] for i in self.system.partition.noncanonical)


def build_constraints(system: PartialHamiltonianSystem) -> ConstraintSet:
    model = system.model
    Phi = tuple(
        simplify(Add((Sym(model.momenta[i]), system.H_alpha[pos])))
        for pos, i in enumerate(system.partition.noncanonical)
    )
    return ConstraintSet(system=system, Phi=Phi)


def multiplier_symbols(system: PartialHamiltonianSystem) -> tuple:
    return tuple(
        Symbol("u_" + c.name, "parameter") for c in system.noncanonical_coords
    )


def total_hamiltonian(
    system: PartialHamiltonianSystem, constraints: ConstraintSet, u: tuple
) -> Expr:
    terms = [system.H0]
    for mult, phi in zip(u, constraints.Phi):
        terms.append(Mul((Sym(mult), phi)))
    return simplify(Add(tuple(terms)))


@dataclass(frozen=True)
class CorrespondenceReport:
    F_matches: list  # zero-verdict kinds per (a, b) pair
    G_matches: list  # zero-verdict kinds per a
    multiplier_consistent: bool
    multiplier_residuals: list
    witness: dict | None

    @property
    def ok(self) -> bool:
        return (
            all(k != "nonzero" for k in self.F_matches)
            and all(k != "nonzero" for k in self.G_matches)
        )


def verify_correspondence(
    system: PartialHamiltonianSystem,
    fg: FGSystem,
    classification: Classification,
    tol: float = 1e-10,
    seed: int = 42,
) -> CorrespondenceReport:
    """Check that the reduced F/G data is the constraint algebra in disguise."""
    model = system.model
    constraints = build_constraints(system)
    sampler = PointSampler(seed=seed)
    fixed = model.param_binding()
    m = len(constraints.Phi)

    F_matches = []
    for a in range(m):
        for b in range(m):
            lhs = fg.F[a][b]
            rhs = poisson_full(constraints.Phi[a], constraints.Phi[b], model)
            F_matches.append(
                is_zero(Add((lhs, Neg(rhs))), sampler=sampler, tol=tol, fixed=fixed).kind
            )

    G_matches = []
    for a in range(m):
        # D_a H0 = {H0, Phi_a}_full - dH_a/dt; the time term vanishes for
        # time-independent additional Hamiltonians
        lhs = simplify(
            Add((fg.G[a], differentiate(system.H_alpha[a], model.time)))
        )
        rhs = poisson_full(system.H0, constraints.Phi[a], model)
        G_matches.append(
            is_zero(Add((lhs, Neg(rhs))), sampler=sampler, tol=tol, fixed=fixed).kind
        )

    # multiplier system {Phi_a, H0} + {Phi_a, Phi_b} u^b = 0 under u -> q_dot
    residuals = []
    witness = None
    consistent = classification.consistent
    if consistent:
        table = solve_noncanonical_velocities(fg, classification)
        u_exprs = [table[v] for v in system.noncanonical_velocities]
        for a in range(m):
            terms = [poisson_full(constraints.Phi[a], system.H0, model)]
            for b in range(m):
                terms.append(
                    Mul(
                        (
                            poisson_full(constraints.Phi[a], constraints.Phi[b], model),
                            u_exprs[b],
                        )
                    )
                )
            resid = simplify(Add(tuple(terms)))
            residuals.append(resid)
            verdict = is_zero(resid, sampler=sampler, tol=tol, fixed=fixed)
            if not verdict.is_zero:
                consistent = False
                witness = verdict.witness
    else:
        residuals = list(classification.residuals)
        witness = classification.witness

    return CorrespondenceReport(
        F_matches=F_matches,
        G_matches=G_matches,
        multiplier_consistent=consistent,
        multiplier_residuals=residuals,
        witness=witness,
    )


def constraint_surface(system: PartialHamiltonianSystem) -> dict:
    """Substitution p_a -> -H_a implementing Phi_a = 0 exactly."""
    model = system.model
    return {
        model.momenta[i]: simplify(Neg(system.H_alpha[pos]))
        for pos, i in enumerate(system.partition.noncanonical)
    }


def dirac_bracket(a, b, system: PartialHamiltonianSystem) -> Expr:
    """{A,B} - {A,Phi} Cinv {Phi,B} over the full space (second class only)."""
    model = system.model
    constraints = build_constraints(system)
    m = len(constraints.Phi)
    if m == 0:
        return poisson_full(a, b, model)
    C = [
        [poisson_full(constraints.Phi[i], constraints.Phi[j], model) for j in range(m)]
        for i in range(m)
    ]
    sampler = PointSampler(seed=42)
    samples = linalg.sample_matrices(C, model.param_binding(), sampler, 16)
    ranks = {linalg.numeric_rank(A) for A in samples}
    if ranks != {m}:
        raise SecondClassRequiredError(
            "constraint matrix is singular; Dirac bracket needs second-class constraints"
        )
    Cinv = linalg.symbolic_inverse(C)
    A = _as_phase_expr(a)
    B = _as_phase_expr(b)
    terms = [poisson_full(A, B, model)]
    APhi = [poisson_full(A, constraints.Phi[i], model) for i in range(m)]
    PhiB = [poisson_full(constraints.Phi[j], B, model) for j in range(m)]
    for i in range(m):
        for j in range(m):
            terms.append(Neg(Mul((APhi[i], Cinv[i][j], PhiB[j]))))
    return simplify(Add(tuple(terms)))
