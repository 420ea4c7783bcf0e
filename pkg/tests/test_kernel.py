"""Tape compiler and backend parity (pure Python vs compiled)."""

import math

import numpy as np
import pytest

from singmech._kernel import BACKEND, pybackend, tape
from singmech.errors import UnboundSymbolError
from singmech.expr import Symbol, evaluate, simplify
from singmech.parser import parse
from singmech.sampling import PointSampler

from expr_corpus import CORPUS

try:
    from singmech._kernel import _ctape as cbackend
except ImportError:
    cbackend = None

needs_ext = pytest.mark.skipif(cbackend is None, reason="compiled kernel not built")

X, Y, Z = Symbol("x"), Symbol("y"), Symbol("z")
CTX = {"x": X, "y": Y, "z": Z}
SYMS = (X, Y, Z)


def compile_source(source):
    e = simplify(parse(source, CTX))
    return e, tape.compile_exprs([e], SYMS)


def test_compile_rejects_unbound_symbol():
    e = parse("x + y", CTX)
    with pytest.raises(UnboundSymbolError):
        tape.compile_exprs([e], (X,))


def test_shared_subtrees_reuse_registers():
    e = simplify(parse("sin(x*y) + sin(x*y)^2", CTX))
    prog = tape.compile_exprs([e], SYMS)
    # sin(x*y) computed once: mul, sin, square, add, plus coefficient work
    assert prog.code.shape[0] <= 6


@pytest.mark.parametrize("source", CORPUS)
def test_tape_matches_tree_evaluation(source):
    e, prog = compile_source(source)
    pts = PointSampler(seed=13).matrix(3, 25)
    batch = prog.eval_many(pts)
    for row, got in zip(pts, batch[:, 0]):
        binding = dict(zip(SYMS, row))
        want = evaluate(e, binding)
        assert got == pytest.approx(want, rel=1e-12, abs=1e-12)


@pytest.mark.parametrize("source", CORPUS)
def test_python_backend_point_equals_batch(source):
    _, prog = compile_source(source)
    pts = PointSampler(seed=17).matrix(3, 10)
    batch = pybackend.eval_batch(prog, pts)
    for i, row in enumerate(pts):
        single = pybackend.eval_point(prog, row)
        assert single[0] == pytest.approx(batch[i, 0], rel=1e-12, abs=1e-14)


@needs_ext
@pytest.mark.parametrize("source", CORPUS)
def test_backend_parity_eval(source):
    _, prog = compile_source(source)
    pts = PointSampler(seed=19).matrix(3, 25)
    a = pybackend.eval_batch(prog, pts)
    b = cbackend.eval_batch(prog, np.ascontiguousarray(pts))
    np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-12)


@needs_ext
def test_backend_parity_rk4():
    # dy0/dt = y1, dy1/dt = -y0
    e0 = simplify(parse("y", {"t": Symbol("t", "time"), "x": X, "y": Y}))
    e1 = simplify(parse("-x", {"t": Symbol("t", "time"), "x": X, "y": Y}))
    prog = tape.compile_exprs([e0, e1], (Symbol("t", "time"), X, Y))
    y0 = np.array([1.0, 0.0])
    sp, np_done = pybackend.integrate(prog, y0.copy(), 0.0, 1e-2, 500, 0)
    sc, nc_done = cbackend.integrate(prog, y0.copy(), 0.0, 1e-2, 500, 0)
    assert np_done == nc_done == 500
    np.testing.assert_array_equal(sp, sc)


@needs_ext
def test_backend_parity_euler():
    e0 = simplify(parse("-x", {"t": Symbol("t", "time"), "x": X}))
    prog = tape.compile_exprs([e0], (Symbol("t", "time"), X))
    y0 = np.array([1.0])
    sp, _ = pybackend.integrate(prog, y0.copy(), 0.0, 0.1, 50, 1)
    sc, _ = cbackend.integrate(prog, y0.copy(), 0.0, 0.1, 50, 1)
    np.testing.assert_array_equal(sp, sc)
    assert sp[-1][0] == pytest.approx(0.9**50)


@pytest.mark.parametrize("backend", [pybackend] + ([cbackend] if cbackend else []))
def test_integrate_stops_on_nonfinite(backend):
    # dy/dt = y^2 from y=1 blows up at t=1
    e = simplify(parse("x^2", {"t": Symbol("t", "time"), "x": X}))
    prog = tape.compile_exprs([e], (Symbol("t", "time"), X))
    states, done = backend.integrate(prog, np.array([1.0]), 0.0, 0.05, 100, 0)
    assert done < 100
    assert np.all(np.isfinite(states[done]))


def test_division_by_zero_yields_nonfinite_not_raise():
    e = simplify(parse("1/x", CTX))
    prog = tape.compile_exprs([e], SYMS)
    out = pybackend.eval_point(prog, np.array([0.0, 1.0, 1.0]))
    assert not math.isfinite(out[0])


def test_selected_backend_name():
    assert BACKEND in ("cython", "python")
    if cbackend is not None:
        import os

        if not os.environ.get("SINGMECH_PURE_PYTHON"):
            assert BACKEND == "cython"


def test_pow_lowering_small_exponents():
    e = simplify(parse("x^4", CTX))
    prog = tape.compile_exprs([e], SYMS)
    # two squarings, no POW opcode
    assert all(op != tape.OP_POW for op, *_ in prog.pycode())
    out = prog.eval(np.array([3.0, 0.0, 0.0]))
    assert out[0] == 81.0


def test_pow_opcode_for_large_exponents():
    e = simplify(parse("x^9", CTX))
    prog = tape.compile_exprs([e], SYMS)
    assert any(op == tape.OP_POW for op, *_ in prog.pycode())
    out = prog.eval(np.array([2.0, 0.0, 0.0]))
    assert out[0] == 512.0
