"""Verification battery: bracket axioms and correspondence identities.

Each check returns a named pass/fail record with a witness binding when
it can point at one.  The battery runs on a completed analysis, so a
test harness can tamper with the analyzed objects (say, an F entry) and
watch the relevant checks trip.
"""

from __future__ import annotations

from dataclasses import dataclass

from .brackets import (
    GAUGE,
    NONGAUGE,
    REGULAR,
    bracket,
    poisson_reduced,
)
from .dirac import constraint_surface, dirac_bracket, poisson_full
from .expr import (
    Add,
    Expr,
    Mul,
    Neg,
    ZeroVerdict,
    is_zero,
    simplify,
    substitute,
)
from .hamiltonian import full_legendre
from .multitime import from_partial, integrability_residual
from .pipeline import AnalysisResult
from .sampling import PointSampler, random_observables


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str
    witness: dict | None = None


def _zc(name: str, verdict: ZeroVerdict, detail: str) -> CheckResult:
    return CheckResult(
        name=name,
        passed=verdict.is_zero,
        detail=f"{detail}: {verdict.kind} (max residual {verdict.max_abs:.3e})",
        witness=verdict.witness,
    )


def _combine(name: str, verdicts: list[ZeroVerdict], detail: str) -> CheckResult:
    bad = [v for v in verdicts if not v.is_zero]
    worst = max((v.max_abs for v in verdicts), default=0.0)
    kinds = {v.kind for v in verdicts} or {"symbolic"}
    return CheckResult(
        name=name,
        passed=not bad,
        detail=f"{detail}: {len(verdicts)} instances, kinds {sorted(kinds)}, max residual {worst:.3e}",
        witness=bad[0].witness if bad else None,
    )


def run_checks(
    result: AnalysisResult,
    seed: int = 42,
    observable_count: int = 20,
    tol: float = 1e-8,
    exact_tol: float = 1e-10,
) -> list[CheckResult]:
    system = result.system
    model = result.model
    fg = result.fg
    cls = result.classification
    sampler = PointSampler(seed=seed)
    fixed = model.param_binding()
    out: list[CheckResult] = []

    def zero(e: Expr, t: float = exact_tol) -> ZeroVerdict:
        return is_zero(e, sampler=sampler, tol=t, fixed=fixed)

    # Hessian symmetry
    W = result.hessian_report.W
    verdicts = [
        zero(Add((W[a][b], Neg(W[b][a]))))
        for a in range(model.n)
        for b in range(a + 1, model.n)
    ]
    out.append(_combine("hessian-symmetry", verdicts, "W[a][b] - W[b][a]"))

    # momenta round trip: defs evaluated on solved velocities return p
    sub = dict(zip(system.canonical_velocities, system.solved_velocities))
    verdicts = []
    for p_sym, p_def in zip(system.canonical_momenta, system.momenta_defs):
        from .expr import Sym

        verdicts.append(zero(Add((substitute(p_def, sub), Neg(Sym(p_sym))))))
    out.append(_combine("momenta-roundtrip", verdicts, "p(solved v) - p"))

    # nondynamical conditions
    from .expr import differentiate

    verdicts = []
    for h in (system.H0, *system.H_alpha):
        for v in system.model.velocities:
            verdicts.append(zero(differentiate(h, v)))
    out.append(_combine("nondynamical-hamiltonians", verdicts, "dH/dv"))

    # regular models: partial transform equals the full Legendre transform
    if cls.verdict == REGULAR:
        out.append(
            _zc(
                "regular-legendre",
                zero(Add((system.H0, Neg(full_legendre(model))))),
                "H0 - full Legendre transform",
            )
        )

    # F antisymmetry, exact
    m = fg.size
    verdicts = [
        zero(Add((fg.F[a][b], fg.F[b][a]))) for a in range(m) for b in range(a, m)
    ]
    anti = _combine("f-antisymmetry", verdicts, "F + F^T")
    anti_sym_only = all(v.kind == "symbolic" for v in verdicts)
    out.append(
        CheckResult(
            anti.name,
            anti.passed and anti_sym_only,
            anti.detail + ("" if anti_sym_only else " [expected symbolic zero]"),
            anti.witness,
        )
    )

    # gauge data
    if cls.verdict == GAUGE and cls.r_F > 0:
        lam = cls.lam
        lead, rest = cls.alpha1, cls.alpha2
        verdicts = []
        for i, a2 in enumerate(rest):
            for j, b2 in enumerate(rest):
                # F_22 = lam F_11 lam^T row by row
                terms = [fg.F[a2][b2]]
                for x, a1 in enumerate(lead):
                    for y, b1 in enumerate(lead):
                        terms.append(
                            Neg(Mul((lam[i][x], lam[j][y], fg.F[a1][b1])))
                        )
                verdicts.append(zero(simplify(Add(tuple(terms)))))
        for i, a2 in enumerate(rest):
            terms = [fg.G[a2]]
            for x, a1 in enumerate(lead):
                terms.append(Neg(Mul((lam[i][x], fg.G[a1]))))
            verdicts.append(zero(simplify(Add(tuple(terms)))))
        out.append(_combine("gauge-lambda-consistency", verdicts, "block relations"))

    # bracket axioms on seeded observables
    phase_syms = [
        *system.canonical_coords,
        *system.canonical_momenta,
        *system.noncanonical_coords,
    ]
    if cls.consistent:
        obs = random_observables(phase_syms, observable_count, seed=seed)
        br = lambda A, B: bracket(A, B, system, cls)

        verdicts = []
        for k in range(0, observable_count - 1, 2):
            verdicts.append(
                zero(Add((br(obs[k], obs[k + 1]), br(obs[k + 1], obs[k]))), tol)
            )
        out.append(_combine("bracket-antisymmetry", verdicts, "{A,B} + {B,A}"))

        verdicts = []
        for k in range(0, observable_count - 2, 3):
            A, B, C = obs[k], obs[k + 1], obs[k + 2]
            lhs = br(simplify(Mul((A, B))), C)
            rhs = Add((Mul((A, br(B, C))), Mul((B, br(A, C)))))
            verdicts.append(zero(Add((lhs, Neg(rhs))), tol))
        out.append(_combine("bracket-leibniz", verdicts, "{AB,C} - A{B,C} - B{A,C}"))

        verdicts = []
        triples = [
            (obs[k], obs[k + 1], obs[k + 2])
            for k in range(0, observable_count - 2, 3)
        ]
        triples.append((obs[-2], obs[-1], obs[0]))
        for A, B, C in triples:
            s = Add(
                (
                    br(A, br(B, C)),
                    br(B, br(C, A)),
                    br(C, br(A, B)),
                )
            )
            verdicts.append(zero(s, tol))
        out.append(_combine("bracket-jacobi", verdicts, "cyclic {A,{B,C}}"))

        # bracket reduces to the Poisson bracket when the correction is empty
        if cls.verdict == REGULAR or (cls.verdict == GAUGE and cls.r_F == 0):
            verdicts = []
            for k in range(0, observable_count - 1, 2):
                A, B = obs[k], obs[k + 1]
                verdicts.append(
                    zero(
                        Add(
                            (
                                br(A, B),
                                Neg(poisson_reduced(A, B, system.canonical_pairs)),
                            )
                        )
                    )
                )
            out.append(
                _combine("bracket-coincides-with-poisson", verdicts, "{A,B}' - {A,B}")
            )

    # Dirac correspondence
    corr = result.correspondence
    if corr is not None:
        out.append(
            CheckResult(
                "dirac-f-correspondence",
                all(k != "nonzero" for k in corr.F_matches),
                f"F vs {{Phi,Phi}}: kinds {sorted(set(corr.F_matches) or {'none'})}",
                corr.witness if any(k == "nonzero" for k in corr.F_matches) else None,
            )
        )
        out.append(
            CheckResult(
                "dirac-g-correspondence",
                all(k != "nonzero" for k in corr.G_matches),
                f"D H0 vs {{H0,Phi}}: kinds {sorted(set(corr.G_matches) or {'none'})}",
                None,
            )
        )
        out.append(
            CheckResult(
                "dirac-multiplier-system",
                corr.multiplier_consistent == cls.consistent,
                "multiplier solvability matches the classification "
                f"(consistent={corr.multiplier_consistent})",
                _maybe_witness(corr.witness),
            )
        )

    if cls.verdict == NONGAUGE:
        obs_pairs = random_observables(phase_syms, 8, seed=seed + 1)
        verdicts = []
        for k in range(0, len(obs_pairs) - 1, 2):
            A, B = obs_pairs[k], obs_pairs[k + 1]
            verdicts.append(
                zero(
                    Add((dirac_bracket(A, B, system), Neg(bracket(A, B, system, cls)))),
                    tol,
                )
            )
        out.append(
            _combine("dirac-equals-nongauge-bracket", verdicts, "{A,B}_D - {A,B}'")
        )

    # evolution via the total Hamiltonian on the constraint surface; for
    # gauge systems the gauge-fixed velocity table supplies the multipliers
    if cls.consistent and result.velocities:
        from .dirac import build_constraints, multiplier_symbols, total_hamiltonian

        constraints = build_constraints(system)
        u = multiplier_symbols(system)
        H_tot = total_hamiltonian(system, constraints, u)
        table = result.velocities
        u_sub = {
            mult: table[v]
            for mult, v in zip(u, system.noncanonical_velocities)
        }
        surface = constraint_surface(system)
        verdicts = []
        for A in random_observables(phase_syms, 4, seed=seed + 2):
            full_law = substitute(
                substitute(poisson_full(A, H_tot, model), u_sub), surface
            )
            reduced_law = bracket(A, system.H0, system, cls)
            verdicts.append(zero(Add((full_law, Neg(reduced_law))), tol))
        out.append(
            _combine(
                "evolution-total-vs-bracket",
                verdicts,
                "{A,H_total}_full on surface - {A,H0}'",
            )
        )

    # multi-time: counting rules plus the residual/FG identity
    mts = result.multitime or from_partial(system)
    n = model.n
    ok_nn = mts.n_times + result.partition.r_W == n + 1
    ok_nr = mts.n_times + result.hessian_report.r_W == n + 1
    out.append(
        CheckResult(
            "multitime-counting-rules",
            ok_nn and ok_nr,
            f"n_times={mts.n_times}, n_p={result.partition.r_W}, "
            f"r_W={result.hessian_report.r_W}, n={n}",
        )
    )
    R = integrability_residual(mts)
    verdicts = []
    for a in range(fg.size):
        verdicts.append(zero(Add((R[0][a + 1], Neg(fg.G[a])))))
        for b in range(fg.size):
            verdicts.append(zero(Add((R[a + 1][b + 1], Neg(fg.F[a][b])))))
    out.append(
        _combine("multitime-residual-matches-fg", verdicts, "R vs (G, F) blocks")
    )

    return out


def _maybe_witness(witness):
    return witness if witness else None
