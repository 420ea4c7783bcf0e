# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled tape interpreter: scalar/batch evaluation and fixed-step
integration.  Mirrors pybackend exactly; selected at import when built."""

from libc.math cimport sin, cos, exp, log, pow, isfinite

import numpy as np

NAME = "cython"


cdef inline void _run(const long long[:, ::1] code, double* r) noexcept nogil:
    cdef Py_ssize_t k, m = code.shape[0]
    cdef long long op, dst, a, b
    for k in range(m):
        op = code[k, 0]
        dst = code[k, 1]
        a = code[k, 2]
        b = code[k, 3]
        if op == 0:
            r[dst] = r[a] + r[b]
        elif op == 1:
            r[dst] = r[a] * r[b]
        elif op == 2:
            r[dst] = r[a] / r[b]
        elif op == 3:
            r[dst] = pow(r[a], <double> b)
        elif op == 4:
            r[dst] = -r[a]
        elif op == 5:
            r[dst] = sin(r[a])
        elif op == 6:
            r[dst] = cos(r[a])
        elif op == 7:
            r[dst] = exp(r[a])
        else:
            r[dst] = log(r[a])


def eval_point(prog, double[::1] x):
    cdef const long long[:, ::1] code = prog.code
    cdef const long long[::1] creg = prog.const_regs
    cdef const double[::1] cval = prog.const_vals
    cdef const long long[::1] out_ix = prog.out
    cdef Py_ssize_t i
    regs_arr = np.zeros(prog.n_regs, dtype=np.float64)
    cdef double[::1] regs = regs_arr
    for i in range(x.shape[0]):
        regs[i] = x[i]
    for i in range(creg.shape[0]):
        regs[creg[i]] = cval[i]
    _run(code, &regs[0])
    out = np.empty(out_ix.shape[0], dtype=np.float64)
    cdef double[::1] o = out
    for i in range(out_ix.shape[0]):
        o[i] = regs[out_ix[i]]
    return out


def eval_batch(prog, double[:, ::1] pts):
    cdef const long long[:, ::1] code = prog.code
    cdef const long long[::1] creg = prog.const_regs
    cdef const double[::1] cval = prog.const_vals
    cdef const long long[::1] out_ix = prog.out
    cdef Py_ssize_t n_in = prog.n_inputs
    cdef Py_ssize_t m = pts.shape[0]
    cdef Py_ssize_t i, j
    regs_arr = np.zeros(prog.n_regs, dtype=np.float64)
    cdef double[::1] regs = regs_arr
    out_arr = np.empty((m, out_ix.shape[0]), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    with nogil:
        for j in range(m):
            for i in range(n_in):
                regs[i] = pts[j, i]
            for i in range(creg.shape[0]):
                regs[creg[i]] = cval[i]
            _run(code, &regs[0])
            for i in range(out_ix.shape[0]):
                out[j, i] = regs[out_ix[i]]
    return out_arr


def integrate(prog, double[::1] y0, double t0, double dt, long long nsteps, int method):
    """Fixed-step integration; returns (states, completed_steps).

    Tape inputs are (t, y...), outputs dy/dt.  method 0 = RK4, 1 = Euler.
    """
    cdef const long long[:, ::1] code = prog.code
    cdef const long long[::1] creg = prog.const_regs
    cdef const double[::1] cval = prog.const_vals
    cdef const long long[::1] out_ix = prog.out
    cdef Py_ssize_t d = y0.shape[0]
    cdef Py_ssize_t i, step
    cdef double t = t0, half = dt / 2.0, sixth = dt / 6.0
    cdef int bad

    regs_arr = np.zeros(prog.n_regs, dtype=np.float64)
    cdef double[::1] regs = regs_arr
    for i in range(creg.shape[0]):
        regs[creg[i]] = cval[i]

    states_arr = np.empty((nsteps + 1, d), dtype=np.float64)
    cdef double[:, ::1] states = states_arr
    work_arr = np.empty((6, d), dtype=np.float64)
    cdef double[:, ::1] w = work_arr  # rows: y, k1, k2, k3, k4, ytmp

    for i in range(d):
        w[0, i] = y0[i]
        states[0, i] = y0[i]

    cdef Py_ssize_t completed = nsteps
    with nogil:
        for step in range(nsteps):
            if method == 1:
                _deriv(code, creg, cval, out_ix, &regs[0], t, w, 0, 1)
                for i in range(d):
                    w[0, i] = w[0, i] + dt * w[1, i]
            else:
                _deriv(code, creg, cval, out_ix, &regs[0], t, w, 0, 1)
                for i in range(d):
                    w[5, i] = w[0, i] + half * w[1, i]
                _deriv(code, creg, cval, out_ix, &regs[0], t + half, w, 5, 2)
                for i in range(d):
                    w[5, i] = w[0, i] + half * w[2, i]
                _deriv(code, creg, cval, out_ix, &regs[0], t + half, w, 5, 3)
                for i in range(d):
                    w[5, i] = w[0, i] + dt * w[3, i]
                _deriv(code, creg, cval, out_ix, &regs[0], t + dt, w, 5, 4)
                for i in range(d):
                    w[0, i] = w[0, i] + sixth * (
                        w[1, i] + 2.0 * (w[2, i] + w[3, i]) + w[4, i]
                    )
            bad = 0
            for i in range(d):
                if not isfinite(w[0, i]):
                    bad = 1
            if bad:
                completed = step
                break
            t = t0 + (step + 1) * dt
            for i in range(d):
                states[step + 1, i] = w[0, i]
    return states_arr, int(completed)


cdef inline void _deriv(
    const long long[:, ::1] code,
    const long long[::1] creg,
    const double[::1] cval,
    const long long[::1] out_ix,
    double* regs,
    double t,
    double[:, ::1] w,
    Py_ssize_t y_row,
    Py_ssize_t k_row,
) noexcept nogil:
    cdef Py_ssize_t i, d = w.shape[1]
    regs[0] = t
    for i in range(d):
        regs[1 + i] = w[y_row, i]
    _run(code, regs)
    for i in range(d):
        w[k_row, i] = regs[out_ix[i]]
