"""Seeded point sampling and random test observables."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .expr import Add, Const, Expr, Mul, Pow, Sym, simplify


@dataclass(frozen=True)
class PointSampler:
    """Uniform draws on [low, high] with a dead zone around zero.

    Deterministic: the same sampler produces the same points on every
    call, so zero tests and reports are reproducible.
    """

    seed: int = 42
    samples: int = 100
    low: float = -2.0
    high: float = 2.0
    exclude: float = 1e-3

    def matrix(self, n_symbols: int, n_points: int, offset: int = 0) -> np.ndarray:
        """(n_points, n_symbols) array; ``offset`` skips earlier draws."""
        rng = np.random.default_rng(self.seed)
        out = np.empty((offset + n_points, max(n_symbols, 1)))
        filled = 0
        while filled < out.size:
            draw = rng.uniform(self.low, self.high, size=out.size - filled)
            good = draw[np.abs(draw) >= self.exclude]
            out.flat[filled : filled + good.size] = good
            filled += good.size
        return out[offset:, :n_symbols]

    def bindings(self, symbols, n_points: int):
        pts = self.matrix(len(symbols), n_points)
        return [dict(zip(symbols, map(float, row))) for row in pts]


def random_observables(symbols, count: int, seed: int, degree: int = 2) -> list[Expr]:
    """Seeded polynomials of degree <= ``degree`` with small integer coefficients.

    Integer coefficients keep the symbolic cancellations exact, which lets
    bracket-identity checks succeed structurally where possible.
    """
    symbols = list(symbols)
    monomials: list[Expr] = [Const(1)]
    monomials += [Sym(s) for s in symbols]
    if degree >= 2:
        for i, a in enumerate(symbols):
            for b in symbols[i:]:
                if a == b:
                    monomials.append(Pow(Sym(a), 2))
                else:
                    monomials.append(Mul((Sym(a), Sym(b))))
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        while True:
            coeffs = rng.integers(-3, 4, size=len(monomials))
            if np.any(coeffs != 0):
                break
        terms = tuple(
            Mul((Const(int(c)), m)) for c, m in zip(coeffs, monomials) if c != 0
        )
        out.append(simplify(Add(terms)))
    return out
