"""F/G linear system, theory classification, and the new brackets.

The noncanonical velocities satisfy F q_dot = G with

    F_ab = dH_a/dq^b - dH_b/dq^a + {H_a, H_b}
    G_a  = D_a H0,      D_a A = dA/dq^a - dH_a/dt + {A, H_a}

(reduced Poisson brackets over the canonical pairs).  F invertible gives
a nongauge theory and the bracket

    {A, B}' = {A, B} + D_a A * Finv^{ab} * D_b B;

rank-deficient F splits the indices, the undetermined velocities are
gauge-fixed to zero, and the same formula runs over the invertible block.
The verdict "inconsistent" means the linear system itself has no
solution at generic points.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from . import linalg
from .errors import InconsistentSystemError, NonConstantRankError
from .expr import (
    Add,
    Expr,
    Mul,
    Neg,
    Symbol,
    ZERO,
    differentiate,
    evaluate,
    free_symbols,
    is_zero,
    simplify,
)
from .hamiltonian import PartialHamiltonianSystem
from .sampling import PointSampler

REGULAR = "regular"
NONGAUGE = "nongauge"
GAUGE = "gauge"
INCONSISTENT = "inconsistent"


@dataclass(frozen=True, eq=False)
class Observable:
    """A named phase-space function over (t, q, p); no velocities allowed."""

    name: str
    expr: Expr

    def __post_init__(self) -> None:
        bad = {s.name for s in free_symbols(self.expr) if s.kind == "velocity"}
        if bad:
            raise ValueError(f"observable depends on velocities: {sorted(bad)}")


def _as_phase_expr(a) -> Expr:
    return a.expr if isinstance(a, Observable) else a


def poisson_reduced(a, b, pairs: Sequence[tuple]) -> Expr:
    """Sum over canonical (q, p) pairs; zero when there are none."""
    A = _as_phase_expr(a)
    B = _as_phase_expr(b)
    terms = []
    for q, p in pairs:
        terms.append(Mul((differentiate(A, q), differentiate(B, p))))
        terms.append(Neg(Mul((differentiate(B, q), differentiate(A, p)))))
    if not terms:
        return ZERO
    return simplify(Add(tuple(terms)))


def _check_reduced_phase_function(e: Expr, system: PartialHamiltonianSystem) -> None:
    """Reduced-space functions may not mention velocities or extra momenta."""
    extra = {
        system.model.momenta[i] for i in system.partition.noncanonical
    }
    bad = free_symbols(e) & (set(system.model.velocities) | extra)
    if bad:
        raise ValueError(
            "not a reduced phase-space function; depends on "
            + ", ".join(sorted(s.name for s in bad))
        )


def D_op(a, alpha: int, system: PartialHamiltonianSystem) -> Expr:
    """dA/dq^a - dH_a/dt + {A, H_a} for the alpha-th noncanonical index."""
    A = _as_phase_expr(a)
    _check_reduced_phase_function(A, system)
    q_a = system.noncanonical_coords[alpha]
    H_a = system.H_alpha[alpha]
    return simplify(
        Add(
            (
                differentiate(A, q_a),
                Neg(differentiate(H_a, system.model.time)),
                poisson_reduced(A, H_a, system.canonical_pairs),
            )
        )
    )


@dataclass(frozen=True, eq=False)
class FGSystem:
    system: PartialHamiltonianSystem
    F: list  # (n - r_W) x (n - r_W) expressions
    G: list  # (n - r_W) expressions

    @property
    def size(self) -> int:
        return len(self.G)


_FG_CACHE = None


def fg_for(system: PartialHamiltonianSystem) -> FGSystem:
    """Build-once accessor; construction is pure so caching is safe."""
    global _FG_CACHE
    if _FG_CACHE is None:
        import weakref

        _FG_CACHE = weakref.WeakKeyDictionary()
    hit = _FG_CACHE.get(system)
    if hit is None:
        hit = build_FG(system)
        _FG_CACHE[system] = hit
    return hit


def build_FG(system: PartialHamiltonianSystem) -> FGSystem:
    coords = system.noncanonical_coords
    H = system.H_alpha
    pairs = system.canonical_pairs
    m = len(coords)
    F = [[ZERO] * m for _ in range(m)]
    for a in range(m):
        for b in range(a + 1, m):
            entry = simplify(
                Add(
                    (
                        differentiate(H[a], coords[b]),
                        Neg(differentiate(H[b], coords[a])),
                        poisson_reduced(H[a], H[b], pairs),
                    )
                )
            )
            F[a][b] = entry
            F[b][a] = simplify(Neg(entry))
    G = [D_op(system.H0, a, system) for a in range(m)]
    return FGSystem(system=system, F=F, G=G)


@dataclass(frozen=True, eq=False)
class Classification:
    verdict: str
    r_F: int
    alpha1: tuple  # positions into the noncanonical list (invertible block)
    alpha2: tuple  # remaining positions (gauge directions)
    F_inv: list | None  # symbolic inverse of the leading block, if available
    lam: list | None  # lambda[alpha2][alpha1] dependence of the trailing rows
    gauge_fixed: tuple  # velocity symbols pinned to zero
    residuals: list  # consistency residuals G_a2 - lambda . G_a1
    witness: dict | None
    samples: int
    seed: int

    @property
    def consistent(self) -> bool:
        return self.verdict != INCONSISTENT


def _sample_F(fg: FGSystem, sampler: PointSampler, samples: int) -> list[np.ndarray]:
    return linalg.sample_matrices(
        fg.F, fg.system.model.param_binding(), sampler, samples
    )


def classify(
    fg: FGSystem,
    seed: int = 42,
    samples: int = 16,
    threshold: float = 1e-10,
    tol: float = 1e-10,
) -> Classification:
    """Rank F at seeded samples, split indices, and check solvability."""
    system = fg.system
    m = fg.size
    meta = dict(samples=samples, seed=seed)
    if m == 0:
        return Classification(
            verdict=REGULAR, r_F=0, alpha1=(), alpha2=(), F_inv=None, lam=None,
            gauge_fixed=(), residuals=[], witness=None, **meta,
        )
    sampler = PointSampler(seed=seed, samples=samples)
    F_samples = _sample_F(fg, sampler, samples)
    r_F, lead, rest = linalg.principal_partition(F_samples, threshold)
    fixed = system.model.param_binding()
    zero_sampler = PointSampler(seed=seed)

    if r_F == m:
        F_inv = _block_inverse(fg.F, tuple(range(m)))
        return Classification(
            verdict=NONGAUGE, r_F=r_F, alpha1=tuple(range(m)), alpha2=(),
            F_inv=F_inv, lam=None, gauge_fixed=(), residuals=[], witness=None, **meta,
        )

    gauge_fixed = tuple(system.noncanonical_velocities[a] for a in rest)
    if r_F == 0:
        residuals = list(fg.G)
        for resid in residuals:
            verdict = is_zero(resid, sampler=zero_sampler, tol=tol, fixed=fixed)
            if not verdict.is_zero:
                return Classification(
                    verdict=INCONSISTENT, r_F=0, alpha1=(), alpha2=tuple(range(m)),
                    F_inv=None, lam=None, gauge_fixed=gauge_fixed,
                    residuals=residuals, witness=verdict.witness, **meta,
                )
        return Classification(
            verdict=GAUGE, r_F=0, alpha1=(), alpha2=tuple(range(m)),
            F_inv=None, lam=None, gauge_fixed=gauge_fixed,
            residuals=residuals, witness=None, **meta,
        )

    block = [[fg.F[a][b] for b in lead] for a in lead]
    block_inv = linalg.symbolic_inverse(block) if r_F <= linalg.MAX_SYMBOLIC_INVERSE else None
    F21 = [[fg.F[a][b] for b in lead] for a in rest]
    lam = linalg.mat_mul(F21, block_inv) if block_inv is not None else None
    G1 = [fg.G[b] for b in lead]
    G2 = [fg.G[a] for a in rest]
    if lam is None:
        raise NonConstantRankError(
            f"cannot form the gauge split: block of size {r_F} not symbolically invertible"
        )
    lamG1 = linalg.mat_vec(lam, G1)
    residuals = [simplify(Add((g2, Neg(lg)))) for g2, lg in zip(G2, lamG1)]
    for resid in residuals:
        verdict = is_zero(resid, sampler=zero_sampler, tol=tol, fixed=fixed)
        if not verdict.is_zero:
            return Classification(
                verdict=INCONSISTENT, r_F=r_F, alpha1=lead, alpha2=rest,
                F_inv=block_inv, lam=lam, gauge_fixed=gauge_fixed,
                residuals=residuals, witness=verdict.witness, **meta,
            )
    return Classification(
        verdict=GAUGE, r_F=r_F, alpha1=lead, alpha2=rest, F_inv=block_inv,
        lam=lam, gauge_fixed=gauge_fixed, residuals=residuals, witness=None, **meta,
    )


def _block_inverse(F: list, idx: tuple) -> list | None:
    """Symbolic inverse of F[idx][:, idx], or None above the cofactor limit."""
    k = len(idx)
    if k == 0:
        return []
    if k > linalg.COFACTOR_LIMIT:
        return None
    block = [[F[a][b] for b in idx] for a in idx]
    return linalg.cofactor_inverse(block)


def solve_noncanonical_velocities(
    fg: FGSystem, classification: Classification
) -> dict:
    """Velocity table for the noncanonical sector.

    Nongauge: all velocities from the inverse of F.  Gauge: the trailing
    block is gauge-fixed to zero and the leading block solved.
    """
    if not classification.consistent:
        raise InconsistentSystemError(
            "the linear system for the noncanonical velocities has no solution"
        )
    system = fg.system
    vels = system.noncanonical_velocities
    out: dict = {}
    if classification.verdict == REGULAR:
        return out
    lead = classification.alpha1
    if lead:
        if classification.F_inv is not None:
            Finv = classification.F_inv
        else:
            Finv = linalg.symbolic_inverse([[fg.F[a][b] for b in lead] for a in lead])
        G1 = [fg.G[b] for b in lead]
        solved = linalg.mat_vec(Finv, G1)
        for pos, a in enumerate(lead):
            out[vels[a]] = solved[pos]
    for a in classification.alpha2:
        out[vels[a]] = ZERO
    return dict(sorted(out.items(), key=lambda kv: vels.index(kv[0])))


def general_gauge_velocities(
    fg: FGSystem, classification: Classification, free: Mapping[Symbol, Expr]
) -> dict:
    """Leading velocities with the gauge directions left symbolic.

    ``free`` maps the alpha2 velocity symbols to arbitrary expressions;
    the returned table solves the leading rows given that choice.
    """
    if not classification.consistent:
        raise InconsistentSystemError("inconsistent system has no velocity table")
    system = fg.system
    vels = system.noncanonical_velocities
    lead = classification.alpha1
    rest = classification.alpha2
    Finv = classification.F_inv
    if Finv is None and lead:
        Finv = linalg.symbolic_inverse([[fg.F[a][b] for b in lead] for a in lead])
    out: dict = {}
    for pos, a in enumerate(lead):
        terms = []
        for k, b in enumerate(lead):
            terms.append(Mul((Finv[pos][k], fg.G[b])))
            for c in rest:
                v_free = free[vels[c]]
                terms.append(Neg(Mul((Finv[pos][k], fg.F[b][c], v_free))))
        out[vels[a]] = simplify(Add(tuple(terms)))
    for c in rest:
        out[vels[c]] = simplify(free[vels[c]])
    return dict(sorted(out.items(), key=lambda kv: vels.index(kv[0])))


class PointwiseBracket:
    """Bracket evaluable only per point (F block above the cofactor limit).

    Evaluation solves the linear system F x = D_b B numerically and takes
    the inner product with D_a A; everything else is exact expressions.
    """

    def __init__(self, base: Expr, DA: list, DB: list, F: list, idx: tuple):
        self.base = base
        self.DA = DA
        self.DB = DB
        self.F = F
        self.idx = idx

    def evaluate(self, binding) -> float:
        k = len(self.idx)
        Fv = np.array(
            [[evaluate(self.F[a][b], binding) for b in self.idx] for a in self.idx]
        )
        da = np.array([evaluate(self.DA[i], binding) for i in range(k)])
        db = np.array([evaluate(self.DB[i], binding) for i in range(k)])
        return float(evaluate(self.base, binding) + da @ np.linalg.solve(Fv, db))


def bracket(a, b, system: PartialHamiltonianSystem, classification: Classification):
    """The evolution bracket for the classified theory.

    Regular theories get the plain reduced Poisson bracket; nongauge and
    gauge theories add the D/Finv correction over the invertible block.
    """
    if not classification.consistent:
        raise InconsistentSystemError("no bracket for an inconsistent system")
    A = _as_phase_expr(a)
    B = _as_phase_expr(b)
    _check_reduced_phase_function(A, system)
    _check_reduced_phase_function(B, system)
    base = poisson_reduced(A, B, system.canonical_pairs)
    idx = classification.alpha1
    if not idx:
        return base
    DA = [D_op(A, al, system) for al in idx]
    DB = [D_op(B, al, system) for al in idx]
    Finv = classification.F_inv
    if Finv is None:
        return PointwiseBracket(base, DA, DB, fg_for(system).F, idx)
    terms = [base]
    k = len(idx)
    for i in range(k):
        for j in range(k):
            terms.append(Mul((DA[i], Finv[i][j], DB[j])))
    return simplify(Add(tuple(terms)))
