"""Stress models beyond the bundled fixtures.

The bundled gauge fixtures all have lambda = 0 and constant F; these
models exercise the nonzero-lambda gauge split, state-dependent F
inverses inside the bracket, time-dependent additional Hamiltonians in
the correspondence identities, and a seeded family of random
velocity-quadratic Lagrangians pushed through the whole battery.
"""

import numpy as np
import pytest

from singmech.brackets import GAUGE, NONGAUGE, bracket
from singmech.checks import run_checks
from singmech.dynamics import IntegratorConfig, State, integrate
from singmech.errors import NonConstantRankError
from singmech.expr import Add, Neg, Sym, is_zero
from singmech.lagrangian import build_model
from singmech.pipeline import analyze
from singmech.sampling import PointSampler


@pytest.fixture(scope="module")
def res_shift():
    # shift symmetry q2 -> q2 + eps, q3 -> q3 - eps: gauge with lambda != 0
    L = "q1_dot*(q2 + q3) - (q1^2 + (q2 + q3)^2)/2"
    return analyze(build_model("shift", ["q1", "q2", "q3"], L))


@pytest.fixture(scope="module")
def res_statef():
    # F = [[0, -2*q2], [2*q2, 0]]: state-dependent invertible F
    L = "q1_dot*q2^2 - (q1^2 + q2^2)/2"
    return analyze(build_model("statef", ["q1", "q2"], L))


def test_shift_model_gauge_with_nonzero_lambda(res_shift):
    cls = res_shift.classification
    assert cls.verdict == GAUGE
    assert cls.r_F == 2
    assert cls.alpha1 == (0, 1) and cls.alpha2 == (2,)
    assert [[str(x) for x in row] for row in cls.lam] == [["0", "1"]]


def test_shift_model_velocity_solve(res_shift):
    vel = {v.name: str(e) for v, e in res_shift.velocities.items()}
    assert vel == {"q1_dot": "q2 + q3", "q2_dot": "-q1", "q3_dot": "0"}


def test_shift_model_checks_pass(res_shift):
    failed = [c for c in run_checks(res_shift) if not c.passed]
    assert not failed, [c.name for c in failed]


def test_shift_model_dynamics_is_oscillator(res_shift):
    # with the gauge fixed, q1 oscillates against q2 + q3
    init = State(t=0.0, q_canonical=(), p=(), q_noncanonical=(1.0, 0.25, -0.25))
    traj = integrate(
        res_shift.system,
        res_shift.classification,
        init,
        IntegratorConfig(dt=1e-3, t_end=2 * np.pi),
    )
    assert np.max(np.abs(traj.states[-1] - traj.states[0])) < 1e-6
    assert np.max(np.abs(traj.states[:, 2] + 0.25)) < 1e-12  # q3 frozen


def test_statef_model_nongauge_with_symbolic_inverse(res_statef):
    cls = res_statef.classification
    assert cls.verdict == NONGAUGE
    assert cls.r_F == 2
    vel = res_statef.velocities
    names = {v.name: e for v, e in vel.items()}
    # q1_dot = G_2 / (2 q2) = 1/2, q2_dot = -q1/(2 q2)
    assert is_zero(Add((names["q1_dot"], Neg(__const_half())))).is_zero
    q1 = res_statef.model.coordinates[0]
    q2 = res_statef.model.coordinates[1]
    from singmech.expr import Div, Mul, Const

    expected = Div(Neg(Sym(q1)), Mul((Const(2), Sym(q2))))
    assert is_zero(Add((names["q2_dot"], Neg(expected)))).is_zero


def __const_half():
    from fractions import Fraction

    from singmech.expr import Const

    return Const(Fraction(1, 2))


def test_statef_model_checks_pass(res_statef):
    failed = [c for c in run_checks(res_statef) if not c.passed]
    assert not failed, [c.name for c in failed]


def test_statef_bracket_jacobi_with_state_dependent_inverse(res_statef):
    # the correction term now involves 1/(2 q2); Jacobi is a real statement
    sys = res_statef.system
    q1, q2 = sys.model.coordinates
    sampler = PointSampler(seed=71)
    br = lambda A, B: bracket(A, B, sys, res_statef.classification)
    A, B, C = Sym(q1), Sym(q2), Add((Sym(q1), Sym(q2)))
    jac = Add((br(A, br(B, C)), br(B, br(C, A)), br(C, br(A, B))))
    assert is_zero(jac, sampler=sampler, tol=1e-8).is_zero


@pytest.fixture(scope="module")
def res_skip():
    # F couples q1 with q3 only: the invertible block is non-contiguous
    L = "q1_dot*q3 - (q1^2 + q3^2)/2"
    return analyze(build_model("skip", ["q1", "q2", "q3"], L))


def test_noncontiguous_gauge_block(res_skip):
    cls = res_skip.classification
    assert cls.verdict == GAUGE
    assert cls.r_F == 2
    assert cls.alpha1 == (0, 2)
    assert cls.alpha2 == (1,)
    vel = {v.name: str(e) for v, e in res_skip.velocities.items()}
    assert vel == {"q1_dot": "q3", "q2_dot": "0", "q3_dot": "-q1"}


def test_noncontiguous_gauge_block_checks_pass(res_skip):
    failed = [c for c in run_checks(res_skip) if not c.passed]
    assert not failed, [c.name for c in failed]


def test_noncontiguous_bracket_canonical_pair(res_skip):
    q1 = res_skip.model.coordinates[0]
    q3 = res_skip.model.coordinates[2]
    out = bracket(Sym(q1), Sym(q3), res_skip.system, res_skip.classification)
    from singmech.expr import Const

    assert out == Const(1)


def test_time_dependent_additional_hamiltonian_correspondence():
    # H_1 = -q2*sin(t) has an explicit time derivative; the correspondence
    # checks carry the dH_a/dt term, so the battery must still pass
    L = "q1_dot*q2*sin(t) - (q1^2 + q2^2)/2"
    res = analyze(build_model("driven", ["q1", "q2"], L))
    assert res.system.time_dependent
    corr = res.correspondence
    assert all(k != "nonzero" for k in corr.F_matches)
    assert all(k != "nonzero" for k in corr.G_matches)


def _random_lagrangian(seed: int):
    """Seeded velocity-quadratic Lagrangian over up to three coordinates."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 4))
    coords = [f"q{i + 1}" for i in range(n)]
    W = rng.integers(-2, 3, size=(n, n))
    W = (W + W.T) // 2
    terms = []
    for i in range(n):
        for j in range(i, n):
            c = W[i][j] if i != j else W[i][i]
            if c:
                if i == j:
                    terms.append(f"{c}*{coords[i]}_dot^2/2")
                else:
                    terms.append(f"{c}*{coords[i]}_dot*{coords[j]}_dot")
    for i in range(n):
        k = int(rng.integers(-2, 3))
        j = int(rng.integers(0, n))
        if k:
            terms.append(f"{k}*{coords[i]}_dot*{coords[j]}")
    for i in range(n):
        k = int(rng.integers(-2, 3))
        if k:
            terms.append(f"{k}*{coords[i]}^2/2")
    if not terms:
        terms.append(f"{coords[0]}_dot^2/2")
    return coords, " + ".join(terms).replace("+ -", "- ")


@pytest.mark.parametrize("seed", range(12))
def test_random_quadratic_lagrangians_survive_battery(seed):
    coords, lag = _random_lagrangian(seed)
    model = build_model(f"rand{seed}", coords, lag)
    try:
        res = analyze(model)
    except NonConstantRankError:
        pytest.skip("rank not constant on the sample box for this draw")
    failed = [c for c in run_checks(res) if not c.passed]
    assert not failed, (lag, [(c.name, c.detail) for c in failed])