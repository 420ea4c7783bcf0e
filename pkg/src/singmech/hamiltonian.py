"""Partial Legendre transform: reduced momenta, H0, and the additional
Hamiltonians.

Only canonical coordinates get momenta p_i = dL/dv_i; the canonical
velocities are solved from those (exactly, via the inverse of the
leading Hessian minor) and substituted everywhere.  H0 is the partial
Legendre transform and each noncanonical direction contributes an
additional Hamiltonian H_a = -dL/dv_a.  When the construction succeeds,
none of these depend on the noncanonical velocities; that is verified,
and the degenerate-block structure (literally zero vs. vanishing Schur
complement) is recorded.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from . import linalg
from .errors import (
    NondynamicalViolationError,
    SingularMinorError,
    UnsupportedLagrangianError,
)
from .expr import (
    Add,
    Expr,
    Mul,
    Neg,
    Sym,
    ZERO,
    differentiate,
    free_symbols,
    is_zero,
    simplify,
    substitute,
)
from .lagrangian import CoordinatePartition, LagrangianModel, hessian
from .sampling import PointSampler


@dataclass(frozen=True, eq=False)
class PartialHamiltonianSystem:
    model: LagrangianModel
    partition: CoordinatePartition
    momenta_defs: tuple  # p_i(t, q, q_dot) for the canonical block
    solved_velocities: tuple  # canonical q_dot in terms of (t, q, p, noncanonical q_dot)
    H0: Expr
    H_alpha: tuple
    time_dependent: bool
    degeneracy_case: str  # "regular" | "literal" | "schur"

    @property
    def canonical_coords(self) -> tuple:
        return self.partition.canonical_coords(self.model)

    @property
    def noncanonical_coords(self) -> tuple:
        return self.partition.noncanonical_coords(self.model)

    @property
    def canonical_momenta(self) -> tuple:
        return tuple(self.model.momenta[i] for i in self.partition.canonical)

    @property
    def canonical_velocities(self) -> tuple:
        return tuple(self.model.velocities[i] for i in self.partition.canonical)

    @property
    def noncanonical_velocities(self) -> tuple:
        return tuple(self.model.velocities[i] for i in self.partition.noncanonical)

    @property
    def canonical_pairs(self) -> tuple:
        return tuple(zip(self.canonical_coords, self.canonical_momenta))

    def observable_context(self) -> dict:
        """Symbols an observable may use: all coordinates, canonical momenta
        only (the noncanonical sector has none), time, parameters."""
        model = self.model
        ctx = {c.name: c for c in model.coordinates}
        ctx.update({m.name: m for m in self.canonical_momenta})
        ctx[model.time.name] = model.time
        ctx.update({p.name: p for p in model.param_symbols})
        return ctx


def momenta(model: LagrangianModel, partition: CoordinatePartition) -> list:
    """p_i = dL/dv_i for canonical indices only."""
    return [
        differentiate(model.lagrangian, model.velocities[i])
        for i in partition.canonical
    ]


def solve_canonical_velocities(
    model: LagrangianModel,
    partition: CoordinatePartition,
    momenta_defs: Sequence[Expr],
) -> list:
    """Invert the affine momentum map on the canonical block.

    p_i = W_ij v_j + W_ia v_a + a_i, so v_i = Winv_ij (p_j - W_ja v_a - a_j)
    with Winv the exact symbolic inverse of the leading minor.
    """
    W = hessian(model)  # raises UnsupportedLagrangian for non-affine momenta
    can = partition.canonical
    non = partition.noncanonical
    r = len(can)
    if r == 0:
        return []
    if r > linalg.MAX_SYMBOLIC_INVERSE:
        raise UnsupportedLagrangianError(
            f"canonical block of size {r} exceeds the symbolic-inversion limit "
            f"({linalg.MAX_SYMBOLIC_INVERSE})"
        )
    zero_vel = {v: ZERO for v in model.velocities}
    a_terms = [substitute(p, zero_vel) for p in momenta_defs]
    lead = [[W[can[i]][can[j]] for j in range(r)] for i in range(r)]
    try:
        Winv = linalg.symbolic_inverse(lead)
    except SingularMinorError:
        raise SingularMinorError(
            "leading Hessian minor of the canonical block is singular"
        ) from None
    rhs = []
    for j in range(r):
        terms = [Sym(model.momenta[can[j]]), Neg(a_terms[j])]
        for b in non:
            terms.append(Neg(Mul((W[can[j]][b], Sym(model.velocities[b])))))
        rhs.append(simplify(Add(tuple(terms))))
    return [
        simplify(Add(tuple(Mul((Winv[i][j], rhs[j])) for j in range(r))))
        for i in range(r)
    ]


def _legendre_core(model: LagrangianModel, partition: CoordinatePartition) -> Expr:
    """p_i v_i + (dL/dv_a) v_a - L, before substituting solved velocities."""
    terms = []
    for i in partition.canonical:
        terms.append(Mul((Sym(model.momenta[i]), Sym(model.velocities[i]))))
    for a in partition.noncanonical:
        dv = differentiate(model.lagrangian, model.velocities[a])
        terms.append(Mul((dv, Sym(model.velocities[a]))))
    terms.append(Neg(model.lagrangian))
    return simplify(Add(tuple(terms)))


@dataclass(frozen=True)
class NondynamicalReport:
    ok: bool
    case: str  # "regular" | "literal" | "schur"
    checked: int
    offending: Expr | None = None
    witness: dict | None = None


def _strip_velocities(
    expr: Expr,
    alpha_velocities: Sequence,
    label: str,
    tol: float,
    sampler: PointSampler,
    fixed: dict,
) -> tuple[Expr, bool]:
    """Remove vanishing noncanonical-velocity dependence.

    Coefficients that are numerically (but not structurally) zero arise
    when the degenerate block cancels only through the Schur complement;
    they are dropped.  A genuinely nonzero coefficient is a violation.
    Returns (cleaned expression, True if a numeric-only cancellation fired).
    """
    schur = False
    for v in alpha_velocities:
        d = differentiate(expr, v)
        verdict = is_zero(d, sampler=sampler, tol=tol, fixed=fixed)
        if not verdict.is_zero:
            raise NondynamicalViolationError(
                f"{label} depends on the noncanonical velocity {v.name}",
                offending=d,
                witness=verdict.witness,
            )
        if v in free_symbols(expr):
            # the value is v-free even when the tree is not (unexpanded
            # powers of sums); with a vanishing derivative, pinning v = 0
            # is exact for symbolic zero and tol-accurate for numeric zero
            expr = substitute(expr, {v: ZERO})
            if verdict.kind != "symbolic":
                schur = True
    leftover = free_symbols(expr) & set(alpha_velocities)
    if leftover:
        raise NondynamicalViolationError(
            f"{label} retains velocities {sorted(s.name for s in leftover)}"
        )
    return expr, schur


def build_system(
    model: LagrangianModel,
    partition: CoordinatePartition,
    tol: float = 1e-10,
    seed: int = 42,
) -> PartialHamiltonianSystem:
    """Construct momenta, solved velocities, H0 and the additional Hamiltonians."""
    p_defs = momenta(model, partition)
    solved = solve_canonical_velocities(model, partition, p_defs)
    can_vels = tuple(model.velocities[i] for i in partition.canonical)
    alpha_vels = tuple(model.velocities[i] for i in partition.noncanonical)
    sub_canonical = dict(zip(can_vels, solved))
    sampler = PointSampler(seed=seed)
    fixed = model.param_binding()

    core = substitute(_legendre_core(model, partition), sub_canonical)
    H0, _ = _strip_velocities(core, alpha_vels, "H0", tol, sampler, fixed)

    H_alpha = []
    for a in partition.noncanonical:
        raw = simplify(Neg(differentiate(model.lagrangian, model.velocities[a])))
        sub = substitute(raw, sub_canonical)
        cleaned, _ = _strip_velocities(
            sub, alpha_vels, f"H_{model.coordinates[a].name}", tol, sampler, fixed
        )
        H_alpha.append(cleaned)

    if not alpha_vels:
        case = "regular"
    else:
        W = hessian(model)
        block_zero = all(
            is_zero(W[a][b], sampler=sampler, tol=tol, fixed=fixed)
            for a in partition.noncanonical
            for b in partition.noncanonical
        )
        case = "literal" if block_zero else "schur"

    tdep = False
    for h in (H0, *H_alpha):
        if not is_zero(differentiate(h, model.time), sampler=sampler, tol=tol, fixed=fixed):
            tdep = True
            break

    return PartialHamiltonianSystem(
        model=model,
        partition=partition,
        momenta_defs=tuple(p_defs),
        solved_velocities=tuple(solved),
        H0=H0,
        H_alpha=tuple(H_alpha),
        time_dependent=tdep,
        degeneracy_case=case,
    )


def build_H0(system: PartialHamiltonianSystem) -> Expr:
    return system.H0


def build_H_alpha(system: PartialHamiltonianSystem) -> tuple:
    return system.H_alpha


def verify_nondynamical(
    system: PartialHamiltonianSystem, tol: float = 1e-10, seed: int = 42
) -> NondynamicalReport:
    """Assert that H0 and every additional Hamiltonian are velocity-free."""
    sampler = PointSampler(seed=seed)
    fixed = system.model.param_binding()
    alpha_vels = system.noncanonical_velocities
    checked = 0
    for h in (system.H0, *system.H_alpha):
        for v in (*alpha_vels, *system.canonical_velocities):
            checked += 1
            d = differentiate(h, v)
            verdict = is_zero(d, sampler=sampler, tol=tol, fixed=fixed)
            if not verdict.is_zero:
                raise NondynamicalViolationError(
                    f"Hamiltonian retains dependence on {v.name}",
                    offending=d,
                    witness=verdict.witness,
                )
    return NondynamicalReport(ok=True, case=system.degeneracy_case, checked=checked)


def full_legendre(model: LagrangianModel) -> Expr:
    """Full-transform Hamiltonian for regular models (every coordinate canonical)."""
    partition = CoordinatePartition(canonical=tuple(range(model.n)), noncanonical=())
    p_defs = momenta(model, partition)
    solved = solve_canonical_velocities(model, partition, p_defs)
    sub = dict(zip(model.velocities, solved))
    terms = [
        Mul((Sym(model.momenta[i]), Sym(model.velocities[i]))) for i in range(model.n)
    ]
    terms.append(Neg(model.lagrangian))
    return substitute(simplify(Add(tuple(terms))), sub)
