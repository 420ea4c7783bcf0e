"""Small dense matrices of expressions plus the numeric rank machinery.

Symbolic inverses use cofactor expansion up to 4x4 and pivoted
Gauss-Jordan (quotients left as exact Div nodes) up to 8x8.  Numeric
rank uses row reduction with full pivoting and a relative threshold.
The partition helpers search principal minors exhaustively, which is
cheap at desk scale and, unlike greedy nested pivoting, cannot miss a
valid minor on zero-diagonal symmetric or antisymmetric matrices.
"""

from __future__ import annotations

from itertools import combinations
from typing import Callable, Sequence

import numpy as np

from .errors import NonConstantRankError, SingularMinorError
from .expr import Add, Const, Div, Expr, Mul, Neg, ONE, ZERO, is_zero, simplify

ExprMatrix = list  # list[list[Expr]]

MAX_SYMBOLIC_INVERSE = 8
COFACTOR_LIMIT = 4


def mat_map(M: ExprMatrix, f: Callable[[Expr], Expr]) -> ExprMatrix:
    return [[f(x) for x in row] for row in M]


def mat_sub(A: ExprMatrix, B: ExprMatrix) -> ExprMatrix:
    return [
        [simplify(Add((a, Neg(b)))) for a, b in zip(ra, rb)]
        for ra, rb in zip(A, B)
    ]


def mat_mul(A: ExprMatrix, B: ExprMatrix) -> ExprMatrix:
    n, k, m = len(A), len(B), len(B[0])
    out = []
    for i in range(n):
        row = []
        for j in range(m):
            row.append(simplify(Add(tuple(Mul((A[i][p], B[p][j])) for p in range(k)))))
        out.append(row)
    return out


def mat_vec(A: ExprMatrix, v: Sequence[Expr]) -> list:
    return [
        simplify(Add(tuple(Mul((A[i][j], v[j])) for j in range(len(v)))))
        for i in range(len(A))
    ]


def det_expr(M: ExprMatrix) -> Expr:
    """Determinant by Laplace expansion; intended for orders <= 4."""
    n = len(M)
    if n == 0:
        return ONE
    if n == 1:
        return simplify(M[0][0])
    terms = []
    for j in range(n):
        minor = [row[:j] + row[j + 1 :] for row in M[1:]]
        term = Mul((M[0][j], det_expr(minor)))
        terms.append(term if j % 2 == 0 else Neg(term))
    return simplify(Add(tuple(terms)))


def cofactor_inverse(M: ExprMatrix) -> ExprMatrix:
    n = len(M)
    det = det_expr(M)
    if is_zero(det):
        raise SingularMinorError("determinant vanishes; matrix not invertible")
    inv = []
    for i in range(n):
        row = []
        for j in range(n):
            minor = [
                [M[r][c] for c in range(n) if c != i] for r in range(n) if r != j
            ]
            cof = det_expr(minor)
            if (i + j) % 2 == 1:
                cof = Neg(cof)
            row.append(simplify(Div(cof, det)))
        inv.append(row)
    return inv


def gauss_jordan_inverse(M: ExprMatrix, zero: Callable[[Expr], bool] | None = None) -> ExprMatrix:
    """Pivoted symbolic Gauss-Jordan; quotients stay exact as Div nodes."""
    n = len(M)
    if zero is None:
        zero = lambda e: bool(is_zero(e))
    aug = [[simplify(x) for x in row] + [ONE if i == j else ZERO for j in range(n)]
           for i, row in enumerate(M)]
    for col in range(n):
        pivot = None
        for r in range(col, n):
            if not zero(aug[r][col]):
                pivot = r
                break
        if pivot is None:
            raise SingularMinorError(f"no usable pivot in column {col}")
        aug[col], aug[pivot] = aug[pivot], aug[col]
        p = aug[col][col]
        aug[col] = [simplify(Div(x, p)) for x in aug[col]]
        for r in range(n):
            if r == col:
                continue
            factor = aug[r][col]
            if isinstance(factor, Const) and factor.value == 0:
                continue
            aug[r] = [
                simplify(Add((x, Neg(Mul((factor, y))))))
                for x, y in zip(aug[r], aug[col])
            ]
    return [row[n:] for row in aug]


def symbolic_inverse(M: ExprMatrix) -> ExprMatrix:
    n = len(M)
    if n > MAX_SYMBOLIC_INVERSE:
        raise SingularMinorError(
            f"symbolic inversion limited to {MAX_SYMBOLIC_INVERSE}x{MAX_SYMBOLIC_INVERSE}"
        )
    if n <= COFACTOR_LIMIT:
        return cofactor_inverse(M)
    return gauss_jordan_inverse(M)


# --------------------------------------------------------------------------
# numeric rank
# --------------------------------------------------------------------------

def sample_matrices(M: ExprMatrix, fixed, sampler, samples: int) -> list:
    """Evaluate an expression matrix at seeded sample states.

    ``fixed`` pins symbols (model parameters) before compilation; the
    remaining free symbols are drawn from the sampler.  Constant matrices
    yield a single sample.
    """
    from ._kernel import compile_exprs
    from .expr import Const, free_symbols, substitute

    n = len(M)
    flat = [M[a][b] for a in range(n) for b in range(n)]
    if fixed:
        flat = [substitute(e, fixed) for e in flat]
    syms = sorted(
        set().union(*[free_symbols(e) for e in flat]) if flat else set(),
        key=lambda s: s.name,
    )
    if not syms:
        vals = []
        for e in flat:
            if not isinstance(e, Const):
                raise ValueError(f"entry {e!r} is not constant yet has no symbols")
            vals.append(float(e.value))
        return [np.array(vals).reshape(n, n)]
    prog = compile_exprs(flat, syms)
    pts = sampler.matrix(len(syms), samples)
    vals = prog.eval_many(pts)
    return [vals[i].reshape(n, n) for i in range(vals.shape[0])]


def numeric_rank(A: np.ndarray, threshold: float = 1e-10) -> int:
    """Rank by row reduction with full pivoting.

    ``threshold`` is relative to the largest initial entry magnitude.
    """
    A = np.array(A, dtype=np.float64)
    n, m = A.shape
    scale = np.max(np.abs(A)) if A.size else 0.0
    if scale == 0.0:
        return 0
    tol = threshold * scale
    rank = 0
    for k in range(min(n, m)):
        sub = np.abs(A[k:, k:])
        r, c = np.unravel_index(np.argmax(sub), sub.shape)
        if sub[r, c] <= tol:
            break
        r += k
        c += k
        A[[k, r], :] = A[[r, k], :]
        A[:, [k, c]] = A[:, [c, k]]
        rank += 1
        A[k + 1 :, k:] -= np.outer(A[k + 1 :, k] / A[k, k], A[k, k:])
    return rank


def _minor_ok(samples: Sequence[np.ndarray], idx: tuple, r: int, threshold: float) -> bool:
    sel = list(idx)
    for A in samples:
        sub = A[np.ix_(sel, sel)]
        if numeric_rank(sub, threshold) != r:
            return False
    return True


def principal_partition(
    samples: Sequence[np.ndarray], threshold: float = 1e-10
) -> tuple[int, tuple, tuple]:
    """Constant rank plus a principal minor realizing it at every sample.

    Returns (rank, leading indices, trailing indices).  The first index
    subset (lexicographic order) that stays nonsingular at all samples is
    chosen, which makes the reordering deterministic.
    """
    if not samples:
        raise ValueError("need at least one sample")
    n = samples[0].shape[0]
    ranks = {numeric_rank(A, threshold) for A in samples}
    if len(ranks) != 1:
        raise NonConstantRankError(f"rank varies across samples: {sorted(ranks)}")
    r = ranks.pop()
    if r == 0:
        return 0, (), tuple(range(n))
    for idx in combinations(range(n), r):
        if _minor_ok(samples, idx, r, threshold):
            rest = tuple(i for i in range(n) if i not in idx)
            return r, idx, rest
    raise NonConstantRankError(
        "no principal minor stays nonsingular across all samples"
    )
