"""Flat instruction tapes compiled from expression trees.

Expressions headed for tight numeric loops (integration, sampling) are
lowered once into a register program; both backends interpret the same
tape.  Identical subtrees share a register, so derivative bundles with
common structure evaluate cheaply.

Instruction layout (int64 x 4): opcode, dst, a, b.  For POW the ``b``
slot holds the literal exponent.  Registers are seeded with the inputs
followed by the constant pool.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..errors import UnboundSymbolError
from ..expr import Add, Call, Const, Div, Expr, Mul, Neg, Pow, Sym, Symbol

OP_ADD = 0
OP_MUL = 1
OP_DIV = 2
OP_POW = 3
OP_NEG = 4
OP_SIN = 5
OP_COS = 6
OP_EXP = 7
OP_LOG = 8

_CALL_OPS = {"sin": OP_SIN, "cos": OP_COS, "exp": OP_EXP, "log": OP_LOG}


@dataclass
class Program:
    code: np.ndarray  # (n_instr, 4) int64
    const_regs: np.ndarray  # int64
    const_vals: np.ndarray  # float64
    n_inputs: int
    n_regs: int
    out: np.ndarray  # int64, registers holding the results
    inputs: tuple
    _pycode: list = field(default_factory=list, repr=False)

    @property
    def n_outputs(self) -> int:
        return len(self.out)

    def pycode(self) -> list:
        if not self._pycode:
            self._pycode = [tuple(map(int, row)) for row in self.code]
        return self._pycode

    def eval(self, x) -> np.ndarray:
        from . import backend

        return backend.eval_point(self, np.asarray(x, dtype=np.float64))

    def eval_many(self, pts) -> np.ndarray:
        from . import backend

        return backend.eval_batch(self, np.ascontiguousarray(pts, dtype=np.float64))


class _Builder:
    def __init__(self, inputs: Sequence[Symbol]):
        self.reg_of: dict = {}
        self.instrs: list[tuple[int, int, int, int]] = []
        self.const_regs: list[int] = []
        self.const_vals: list[float] = []
        self.const_ix: dict[float, int] = {}
        self.n_inputs = len(inputs)
        self.next_reg = len(inputs)
        for i, s in enumerate(inputs):
            self.reg_of[Sym(s)] = i

    def fresh(self) -> int:
        r = self.next_reg
        self.next_reg += 1
        return r

    def const(self, v: float) -> int:
        r = self.const_ix.get(v)
        if r is None:
            r = self.fresh()
            self.const_ix[v] = r
            self.const_regs.append(r)
            self.const_vals.append(v)
        return r

    def emit(self, op: int, a: int, b: int = 0) -> int:
        dst = self.fresh()
        self.instrs.append((op, dst, a, b))
        return dst

    def visit(self, e: Expr) -> int:
        r = self.reg_of.get(e)
        if r is not None:
            return r
        if isinstance(e, Const):
            r = self.const(float(e.value))
        elif isinstance(e, Sym):
            raise UnboundSymbolError(e.symbol.name)
        elif isinstance(e, Add):
            r = self.visit(e.terms[0])
            for t in e.terms[1:]:
                r = self.emit(OP_ADD, r, self.visit(t))
        elif isinstance(e, Mul):
            r = self.visit(e.factors[0])
            for f in e.factors[1:]:
                r = self.emit(OP_MUL, r, self.visit(f))
        elif isinstance(e, Pow):
            r = self._power(self.visit(e.base), e.exponent)
        elif isinstance(e, Div):
            r = self.emit(OP_DIV, self.visit(e.num), self.visit(e.den))
        elif isinstance(e, Neg):
            r = self.emit(OP_NEG, self.visit(e.child))
        elif isinstance(e, Call):
            r = self.emit(_CALL_OPS[e.fn], self.visit(e.arg))
        else:
            raise TypeError(f"not an expression: {e!r}")
        self.reg_of[e] = r
        return r

    def _power(self, base_reg: int, k: int) -> int:
        # small exponents lower to multiply chains; the rest keep a POW op
        if k == 0:
            return self.const(1.0)
        neg = k < 0
        m = -k if neg else k
        if m <= 4:
            r = base_reg
            if m == 2:
                r = self.emit(OP_MUL, base_reg, base_reg)
            elif m == 3:
                r = self.emit(OP_MUL, self.emit(OP_MUL, base_reg, base_reg), base_reg)
            elif m == 4:
                sq = self.emit(OP_MUL, base_reg, base_reg)
                r = self.emit(OP_MUL, sq, sq)
            if neg:
                r = self.emit(OP_DIV, self.const(1.0), r)
            return r
        return self.emit(OP_POW, base_reg, k)


def compile_exprs(exprs: Sequence[Expr], inputs: Sequence[Symbol]) -> Program:
    """Lower ``exprs`` over the ordered input symbols into one tape."""
    b = _Builder(inputs)
    out = np.array([b.visit(e) for e in exprs], dtype=np.int64)
    code = np.array(b.instrs, dtype=np.int64).reshape(-1, 4)
    return Program(
        code=np.ascontiguousarray(code),
        const_regs=np.array(b.const_regs, dtype=np.int64),
        const_vals=np.array(b.const_vals, dtype=np.float64),
        n_inputs=b.n_inputs,
        n_regs=b.next_reg,
        out=out,
        inputs=tuple(inputs),
    )
