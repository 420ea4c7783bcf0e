"""Pure-Python tape interpreter; same semantics as the compiled core.

Scalar evaluation and integration loop over instructions directly.
Batch evaluation vectorizes registers across sample points with numpy,
which keeps zero-testing fast even without the extension.
"""

from __future__ import annotations

import math

import numpy as np

NAME = "python"


def _pow(a: float, k: int) -> float:
    try:
        return a**k
    except ZeroDivisionError:
        return math.inf
    except OverflowError:
        return math.inf if (a > 0 or k % 2 == 0) else -math.inf


def _div(a: float, b: float) -> float:
    try:
        return a / b
    except ZeroDivisionError:
        if a == 0.0 or math.isnan(a):
            return math.nan
        return math.inf if a > 0 else -math.inf


def _exp(a: float) -> float:
    try:
        return math.exp(a)
    except OverflowError:
        return math.inf


def _log(a: float) -> float:
    if a > 0.0:
        return math.log(a)
    return -math.inf if a == 0.0 else math.nan


def _run_scalar(code, r: list) -> None:
    for op, dst, a, b in code:
        if op == 0:
            r[dst] = r[a] + r[b]
        elif op == 1:
            r[dst] = r[a] * r[b]
        elif op == 2:
            r[dst] = _div(r[a], r[b])
        elif op == 3:
            r[dst] = _pow(r[a], b)
        elif op == 4:
            r[dst] = -r[a]
        elif op == 5:
            r[dst] = math.sin(r[a])
        elif op == 6:
            r[dst] = math.cos(r[a])
        elif op == 7:
            r[dst] = _exp(r[a])
        else:
            r[dst] = _log(r[a])


def eval_point(prog, x: np.ndarray) -> np.ndarray:
    r = [0.0] * prog.n_regs
    for i, v in enumerate(x):
        r[i] = float(v)
    for reg, val in zip(prog.const_regs.tolist(), prog.const_vals.tolist()):
        r[reg] = val
    _run_scalar(prog.pycode(), r)
    return np.array([r[i] for i in prog.out], dtype=np.float64)


def eval_batch(prog, pts: np.ndarray) -> np.ndarray:
    m = pts.shape[0]
    regs: list = [None] * prog.n_regs
    for i in range(prog.n_inputs):
        regs[i] = pts[:, i].astype(np.float64, copy=True)
    for reg, val in zip(prog.const_regs, prog.const_vals):
        regs[reg] = np.full(m, val)
    with np.errstate(all="ignore"):
        for op, dst, a, b in prog.pycode():
            if op == 0:
                regs[dst] = regs[a] + regs[b]
            elif op == 1:
                regs[dst] = regs[a] * regs[b]
            elif op == 2:
                regs[dst] = regs[a] / regs[b]
            elif op == 3:
                regs[dst] = regs[a] ** float(b)
            elif op == 4:
                regs[dst] = -regs[a]
            elif op == 5:
                regs[dst] = np.sin(regs[a])
            elif op == 6:
                regs[dst] = np.cos(regs[a])
            elif op == 7:
                regs[dst] = np.exp(regs[a])
            else:
                regs[dst] = np.log(regs[a])
    out = np.empty((m, prog.n_outputs))
    for j, reg in enumerate(prog.out):
        out[:, j] = regs[reg]
    return out


def integrate(prog, y0: np.ndarray, t0: float, dt: float, nsteps: int, method: int):
    """Fixed-step integration; returns (states, completed_steps).

    Tape inputs are (t, y...), outputs dy/dt.  method 0 = RK4, 1 = Euler.
    A non-finite state stops early; ``completed_steps`` then marks the
    last good row.
    """
    d = len(y0)
    code = prog.pycode()
    n_regs = prog.n_regs
    base = [0.0] * n_regs
    for reg, val in zip(prog.const_regs.tolist(), prog.const_vals.tolist()):
        base[reg] = val
    out_ix = list(prog.out)

    def f(t: float, y):
        r = base.copy()
        r[0] = t
        for i in range(d):
            r[1 + i] = y[i]
        _run_scalar(code, r)
        return [r[i] for i in out_ix]

    states = np.empty((nsteps + 1, d))
    states[0] = y0
    y = [float(v) for v in y0]
    t = t0
    half = dt / 2.0
    sixth = dt / 6.0
    for step in range(nsteps):
        if method == 1:
            k1 = f(t, y)
            y = [y[i] + dt * k1[i] for i in range(d)]
        else:
            k1 = f(t, y)
            k2 = f(t + half, [y[i] + half * k1[i] for i in range(d)])
            k3 = f(t + half, [y[i] + half * k2[i] for i in range(d)])
            k4 = f(t + dt, [y[i] + dt * k3[i] for i in range(d)])
            y = [
                y[i] + sixth * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i])
                for i in range(d)
            ]
        if not all(math.isfinite(v) for v in y):
            return states, step
        t = t0 + (step + 1) * dt
        states[step + 1] = y
    return states, nsteps
