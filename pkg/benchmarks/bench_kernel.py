#!/usr/bin/env python3
"""Benchmark: compiled tape kernel vs the pure-Python fallback.

Times the three hot operations (single-point evaluation, batched
evaluation, RK4 integration) on the bundled first-order oscillator and
on a deliberately messy transcendental expression, then prints the
speedups.  Run from the repository root:

    python benchmarks/bench_kernel.py [--steps 200000] [--batch 20000]
"""

from __future__ import annotations

import argparse
import math
import time

import numpy as np

from singmech._kernel import pybackend, tape
from singmech.expr import Symbol
from singmech.models import model_S1
from singmech.parser import parse
from singmech.pipeline import analyze

try:
    from singmech._kernel import _ctape as cbackend
except ImportError:
    cbackend = None


def time_call(fn, repeat: int = 5) -> float:
    best = math.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def rhs_program():
    from singmech.dynamics import rhs_expressions, state_symbols

    result = analyze(model_S1())
    exprs = rhs_expressions(result.system, result.classification)
    inputs = (result.model.time, *state_symbols(result.system))
    return tape.compile_exprs(exprs, inputs)


def messy_program():
    syms = [Symbol(n) for n in ("a", "b", "c")]
    ctx = {s.name: s for s in syms}
    text = "sin(a*b)^2 + cos(a*b)^2 * exp(c/(1 + a^2)) - log(2 + b^4) / (3 + cos(c))^2"
    expr = parse(text, ctx)
    from singmech.expr import simplify

    return tape.compile_exprs([simplify(expr)], syms)


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--steps", type=int, default=200_000)
    ap.add_argument("--batch", type=int, default=20_000)
    args = ap.parse_args()

    backends = [("python", pybackend)]
    if cbackend is not None:
        backends.append(("cython", cbackend))
    else:
        print("compiled backend not built; showing pure Python only")

    prog_rhs = rhs_program()
    prog_messy = messy_program()
    rng = np.random.default_rng(0)
    batch = rng.uniform(-2.0, 2.0, size=(args.batch, prog_messy.n_inputs))
    point = np.ascontiguousarray(batch[0])
    y0 = np.array([1.0, 0.0])

    rows = []
    for name, impl in backends:
        t_point = time_call(
            lambda: [impl.eval_point(prog_messy, point) for _ in range(2_000)]
        )
        t_batch = time_call(lambda: impl.eval_batch(prog_messy, batch))
        t_rk4 = time_call(
            lambda: impl.integrate(prog_rhs, y0.copy(), 0.0, 1e-3, args.steps, 0)
        )
        rows.append((name, t_point, t_batch, t_rk4))

    print(f"{'backend':<10} {'eval_point x2000':>18} {'eval_batch':>14} {'rk4':>12}")
    for name, t_point, t_batch, t_rk4 in rows:
        print(f"{name:<10} {t_point:>16.4f}s {t_batch:>12.4f}s {t_rk4:>10.4f}s")
    if len(rows) == 2:
        (_, p1, p2, p3), (_, c1, c2, c3) = rows
        print(
            f"{'speedup':<10} {p1 / c1:>17.1f}x {p2 / c2:>13.1f}x {p3 / c3:>11.1f}x"
        )
        states_p, _ = pybackend.integrate(prog_rhs, y0.copy(), 0.0, 1e-3, 1000, 0)
        states_c, _ = cbackend.integrate(prog_rhs, y0.copy(), 0.0, 1e-3, 1000, 0)
        print(f"max |python - cython| over 1000 steps: {np.max(np.abs(states_p - states_c)):.3e}")


if __name__ == "__main__":
    main()
