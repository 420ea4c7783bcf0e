"""Multi-time mapping, integrability residuals, and path independence."""

import numpy as np
import pytest

from singmech.dynamics import IntegratorConfig, State, integrate
from singmech.expr import Add, Const, Neg, Sym, is_zero
from singmech.multitime import (
    TimePath,
    endpoint_spread,
    from_partial,
    integrability_residual,
    integrate_path,
    is_integrable,
    residual_verdicts,
    staircase_path,
)

PATH_A = TimePath(((0.0, 0.0), (1.0, 0.0), (1.0, 1.0)))
PATH_B = TimePath(((0.0, 0.0), (0.0, 1.0), (1.0, 1.0)))


# from_partial ------------------------------------------------------------------

def test_from_partial_G1(res_G1):
    mts = from_partial(res_G1.system)
    assert mts.n_times == 2
    assert [t.name for t in mts.taus] == ["t", "q2"]
    assert [str(h) for h in mts.hamiltonians] == ["1/2*p_q1^2", "0"]


def test_from_partial_regular_is_single_time(res_R):
    mts = from_partial(res_R.system)
    assert mts.n_times == 1
    assert [t.name for t in mts.taus] == ["t"]


def test_from_partial_S1_counting(res_S1):
    mts = from_partial(res_S1.system)
    assert mts.n_times == 3
    n, n_p = res_S1.model.n, res_S1.partition.r_W
    assert mts.n_times + n_p == n + 1
    assert mts.n_times + res_S1.hessian_report.r_W == n + 1


@pytest.mark.parametrize("fixture", ["res_R", "res_S1", "res_S2", "res_G1"])
def test_counting_rules_all_fixtures(fixture, request):
    res = request.getfixturevalue(fixture)
    mts = from_partial(res.system)
    assert mts.n_times + res.partition.r_W == res.model.n + 1
    assert mts.n_times + res.hessian_report.r_W == res.model.n + 1


# residuals -----------------------------------------------------------------------

def test_residual_drift_is_zero(drift):
    R = integrability_residual(drift)
    assert R[0][1] == Const(0)
    assert is_integrable(drift)


def test_residual_shear_is_minus_p(shear):
    R = integrability_residual(shear)
    p = shear.pairs[0][1]
    assert is_zero(Add((R[0][1], Sym(p))))
    assert not is_integrable(shear)


def test_residual_single_time_trivial(res_R):
    mts = from_partial(res_R.system)
    assert integrability_residual(mts) == [[Const(0)]]
    assert is_integrable(mts)


def test_residual_verdict_matrix_shape(shear):
    v = residual_verdicts(shear)
    assert v[0][1] == "nonzero"
    assert v[0][0] == "symbolic"


def test_residual_matches_fg_blocks(res_S1):
    mts = from_partial(res_S1.system)
    R = integrability_residual(mts)
    F, G = res_S1.fg.F, res_S1.fg.G
    for a in range(2):
        assert is_zero(Add((R[0][a + 1], Neg(G[a]))))
        for b in range(2):
            assert is_zero(Add((R[a + 1][b + 1], Neg(F[a][b]))))


# path integration ------------------------------------------------------------------

def test_integrate_path_drift_example(drift):
    end = integrate_path(drift, PATH_A, [0.0, 1.0])
    np.testing.assert_allclose(end, [2.0, 1.0], atol=1e-10)


def test_integrate_path_drift_order_independent(drift):
    end = integrate_path(drift, PATH_B, [0.0, 1.0])
    np.testing.assert_allclose(end, [2.0, 1.0], atol=1e-10)


def test_integrate_path_shear_paths_differ(shear):
    ea = integrate_path(shear, PATH_A, [0.0, 1.0])
    eb = integrate_path(shear, PATH_B, [0.0, 1.0])
    assert np.max(np.abs(ea - eb)) > 1e-3


def test_path_requires_two_waypoints():
    with pytest.raises(ValueError):
        TimePath(((0.0, 0.0),))


def test_path_dimension_mismatch(drift):
    with pytest.raises(ValueError):
        integrate_path(drift, TimePath(((0.0,), (1.0,))), [0.0, 1.0])


def test_path_independence_seeded_staircases(drift):
    rng = np.random.default_rng(1234)
    for trial in range(5):
        paths = [staircase_path((0.0, 0.0), (1.5, -0.5), rng) for _ in range(2)]
        _, spread = endpoint_spread(drift, paths, [0.2, 0.8])
        assert spread < 1e-8


def test_nonintegrable_witness_pair(shear):
    _, spread = endpoint_spread(shear, [PATH_A, PATH_B], [0.0, 1.0])
    assert spread > 1e-3


def test_single_time_path_matches_dynamics(res_R):
    # a path moving only tau^0 = t is ordinary Hamiltonian evolution
    mts = from_partial(res_R.system)
    init = State(t=0.0, q_canonical=(1.0, 0.0), p=(0.0, 0.5), q_noncanonical=())
    t_end = 1.0
    steps = 1000
    traj = integrate(
        res_R.system,
        res_R.classification,
        init,
        IntegratorConfig(dt=t_end / steps, t_end=t_end),
    )
    end = integrate_path(
        mts,
        TimePath(((0.0,), (t_end,))),
        list(init.vector()),
        steps_per_segment=steps,
    )
    np.testing.assert_allclose(end, traj.states[-1], atol=1e-10)


def test_integrate_path_empty_canonical_sector(res_S1):
    mts = from_partial(res_S1.system)
    end = integrate_path(mts, TimePath(((0.0, 0.0, 0.0), (1.0, 2.0, 3.0))), [])
    assert end.size == 0
