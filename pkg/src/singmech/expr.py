"""Immutable symbolic expression trees with exact differentiation.

The expression language is deliberately small: rational or float
constants, symbols, n-ary sums and products, integer powers, quotients,
negation, and the unary functions sin, cos, exp, log.  Simplification
flattens nested sums and products, folds constants, cancels 0/1
identities, distributes products over single-power sum factors (powers
of sums stay whole), and combines identical monomials by structural
key; it does no trigonometric or logarithmic rewriting, so ``is_zero``
falls back to seeded numeric sampling for identities the normal form
cannot see.

Integer literals and ratios of integers are kept as exact rationals;
floats enter only through decimal literals and function folding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Union

from .errors import EvalDomainError, UnboundSymbolError

NumberLike = Union[int, float, Fraction]

_KINDS = ("coordinate", "velocity", "momentum", "time", "parameter")

FUNCTIONS = ("sin", "cos", "exp", "log")


@dataclass(frozen=True, slots=True)
class Symbol:
    """A named leaf with a fixed role; the role never changes."""

    name: str
    kind: str = "parameter"

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise ValueError(f"unknown symbol kind {self.kind!r}")

    def __repr__(self) -> str:
        return self.name


class Expr:
    """Base class for expression nodes.  Nodes are immutable values."""

    __slots__ = ()

    def __add__(self, other):
        return Add((self, as_expr(other)))

    def __radd__(self, other):
        return Add((as_expr(other), self))

    def __sub__(self, other):
        return Add((self, Neg(as_expr(other))))

    def __rsub__(self, other):
        return Add((as_expr(other), Neg(self)))

    def __mul__(self, other):
        return Mul((self, as_expr(other)))

    def __rmul__(self, other):
        return Mul((as_expr(other), self))

    def __truediv__(self, other):
        return Div(self, as_expr(other))

    def __rtruediv__(self, other):
        return Div(as_expr(other), self)

    def __pow__(self, k):
        return Pow(self, int(k))

    def __neg__(self):
        return Neg(self)

    def __str__(self) -> str:
        return render(self)


@dataclass(frozen=True, slots=True, repr=False)
class Const(Expr):
    value: Union[Fraction, float]

    def __post_init__(self) -> None:
        v = self.value
        if isinstance(v, bool) or not isinstance(v, (int, Fraction, float)):
            raise TypeError(f"bad constant {v!r}")
        if isinstance(v, int):
            object.__setattr__(self, "value", Fraction(v))
        elif isinstance(v, float) and not math.isfinite(v):
            raise ValueError(f"non-finite constant {v!r}")

    def __repr__(self) -> str:
        return f"Const({self.value})"


@dataclass(frozen=True, slots=True, repr=False)
class Sym(Expr):
    symbol: Symbol

    def __repr__(self) -> str:
        return self.symbol.name


@dataclass(frozen=True, slots=True, repr=False)
class Add(Expr):
    terms: tuple

    def __repr__(self) -> str:
        return "Add(%s)" % ", ".join(map(repr, self.terms))


@dataclass(frozen=True, slots=True, repr=False)
class Mul(Expr):
    factors: tuple

    def __repr__(self) -> str:
        return "Mul(%s)" % ", ".join(map(repr, self.factors))


@dataclass(frozen=True, slots=True, repr=False)
class Pow(Expr):
    base: Expr
    exponent: int

    def __post_init__(self) -> None:
        if isinstance(self.exponent, bool) or not isinstance(self.exponent, int):
            raise TypeError("exponent must be an int")

    def __repr__(self) -> str:
        return f"Pow({self.base!r}, {self.exponent})"


@dataclass(frozen=True, slots=True, repr=False)
class Div(Expr):
    num: Expr
    den: Expr

    def __repr__(self) -> str:
        return f"Div({self.num!r}, {self.den!r})"


@dataclass(frozen=True, slots=True, repr=False)
class Neg(Expr):
    child: Expr

    def __repr__(self) -> str:
        return f"Neg({self.child!r})"


@dataclass(frozen=True, slots=True, repr=False)
class Call(Expr):
    fn: str
    arg: Expr

    def __post_init__(self) -> None:
        if self.fn not in FUNCTIONS:
            raise ValueError(f"unknown function {self.fn!r}")

    def __repr__(self) -> str:
        return f"{self.fn}({self.arg!r})"


ZERO = Const(Fraction(0))
ONE = Const(Fraction(1))
NEG_ONE = Const(Fraction(-1))


def as_expr(x) -> Expr:
    if isinstance(x, Expr):
        return x
    if isinstance(x, Symbol):
        return Sym(x)
    if isinstance(x, (int, float, Fraction)):
        return Const(x)
    raise TypeError(f"cannot coerce {x!r} to an expression")


def free_symbols(e: Expr) -> frozenset:
    """All symbols occurring in ``e``."""
    out: set = set()
    stack = [e]
    while stack:
        n = stack.pop()
        if isinstance(n, Sym):
            out.add(n.symbol)
        elif isinstance(n, Add):
            stack.extend(n.terms)
        elif isinstance(n, Mul):
            stack.extend(n.factors)
        elif isinstance(n, Pow):
            stack.append(n.base)
        elif isinstance(n, Div):
            stack.append(n.num)
            stack.append(n.den)
        elif isinstance(n, Neg):
            stack.append(n.child)
        elif isinstance(n, Call):
            stack.append(n.arg)
    return frozenset(out)


# --------------------------------------------------------------------------
# canonical ordering
# --------------------------------------------------------------------------

def _skey(e: Expr):
    """Total order key; used to sort terms and factors deterministically."""
    if isinstance(e, Const):
        return (0, float(e.value), str(e.value))
    if isinstance(e, Sym):
        return (1, e.symbol.name, e.symbol.kind)
    if isinstance(e, Call):
        return (2, e.fn, _skey(e.arg))
    if isinstance(e, Pow):
        return (3, _skey(e.base), e.exponent)
    if isinstance(e, Mul):
        return (4, tuple(_skey(f) for f in e.factors))
    if isinstance(e, Add):
        return (5, tuple(_skey(t) for t in e.terms))
    if isinstance(e, Div):
        return (6, _skey(e.num), _skey(e.den))
    if isinstance(e, Neg):
        return (7, _skey(e.child))
    raise TypeError(f"not an expression: {e!r}")


# --------------------------------------------------------------------------
# simplification
# --------------------------------------------------------------------------

def simplify(e: Expr) -> Expr:
    """Normal form: flattened, constant-folded, monomial-combined.

    Idempotent: simplify(simplify(e)) is structurally simplify(e).
    """
    if isinstance(e, (Const, Sym)):
        return e
    if isinstance(e, Add):
        return _sum([simplify(t) for t in e.terms])
    if isinstance(e, Mul):
        return _product([simplify(f) for f in e.factors])
    if isinstance(e, Pow):
        return _power(simplify(e.base), e.exponent)
    if isinstance(e, Div):
        return _quotient(simplify(e.num), simplify(e.den))
    if isinstance(e, Neg):
        return _product([NEG_ONE, simplify(e.child)])
    if isinstance(e, Call):
        return _call(e.fn, simplify(e.arg))
    raise TypeError(f"not an expression: {e!r}")


def _power(base: Expr, k: int) -> Expr:
    if k == 0:
        return ONE
    if k == 1:
        return base
    if isinstance(base, Const):
        if base.value == 0 and k < 0:
            return Pow(base, k)  # undefined; surfaces as DomainError at eval
        return Const(base.value**k)
    if isinstance(base, Pow):
        return _power(base.base, base.exponent * k)
    if isinstance(base, Mul):
        return _product([_power(f, k) for f in base.factors])
    return Pow(base, k)


def _quotient(num: Expr, den: Expr) -> Expr:
    if isinstance(den, Const):
        if den.value == 0:
            return Div(num, den)
        inv = Fraction(1) / den.value if isinstance(den.value, Fraction) else 1.0 / den.value
        return _product([Const(inv), num])
    return _product([num, _power(den, -1)])


_FN_FOLD = {"sin": math.sin, "cos": math.cos, "exp": math.exp, "log": math.log}


def _call(fn: str, arg: Expr) -> Expr:
    if isinstance(arg, Const):
        try:
            return Const(_FN_FOLD[fn](float(arg.value)))
        except (ValueError, OverflowError):
            return Call(fn, arg)
    return Call(fn, arg)


def _product(factors) -> Expr:
    coeff = Fraction(1)
    bases: dict = {}
    stack = list(reversed(factors))
    while stack:
        f = stack.pop()
        if isinstance(f, Mul):
            stack.extend(reversed(f.factors))
        elif isinstance(f, Const):
            coeff = coeff * f.value
        elif isinstance(f, Pow) and isinstance(f.base, Const):
            if f.base.value == 0 and f.exponent < 0:
                bases[f] = bases.get(f, 0) + 1
            else:
                coeff = coeff * f.base.value**f.exponent
        elif isinstance(f, Pow):
            bases[f.base] = bases.get(f.base, 0) + f.exponent
        else:
            bases[f] = bases.get(f, 0) + 1
    if coeff == 0:
        return ZERO
    sums = []
    rebuilt = []
    for base in sorted(bases, key=_skey):
        k = bases[base]
        if k == 0:
            continue
        if k == 1 and isinstance(base, Add):
            sums.append(base)
        else:
            rebuilt.append(base if k == 1 else Pow(base, k))
    if not sums:
        return _assemble(coeff, rebuilt)
    # distribute over single-power sum factors; powers of sums stay whole
    terms = [_assemble(coeff, rebuilt)]
    for s in sums:
        terms = [_product([t, u]) for t in terms for u in s.terms]
    return _sum(terms)


def _assemble(coeff, rebuilt: list) -> Expr:
    if not rebuilt:
        return Const(coeff)
    if coeff != 1:
        rebuilt = [Const(coeff)] + rebuilt
    if len(rebuilt) == 1:
        return rebuilt[0]
    return Mul(tuple(rebuilt))


def _split_coeff(term: Expr):
    """term -> (coefficient, monomial key).  ``term`` is in normal form."""
    if isinstance(term, Mul) and isinstance(term.factors[0], Const):
        rest = term.factors[1:]
        key = rest[0] if len(rest) == 1 else Mul(rest)
        return term.factors[0].value, key
    return Fraction(1), term


def _attach_coeff(c, key: Expr) -> Expr:
    if c == 1:
        return key
    if isinstance(key, Mul):
        return Mul((Const(c),) + key.factors)
    return Mul((Const(c), key))


def _sum(terms) -> Expr:
    const = Fraction(0)
    groups: dict = {}
    stack = list(reversed(terms))
    while stack:
        t = stack.pop()
        if isinstance(t, Add):
            stack.extend(reversed(t.terms))
        elif isinstance(t, Const):
            const = const + t.value
        else:
            c, key = _split_coeff(t)
            groups[key] = groups.get(key, Fraction(0)) + c
    rebuilt = []
    for key in sorted(groups, key=_skey):
        c = groups[key]
        if c == 0:
            continue
        rebuilt.append(_attach_coeff(c, key))
    if const != 0 or not rebuilt:
        rebuilt.append(Const(const))
    if len(rebuilt) == 1:
        return rebuilt[0]
    return Add(tuple(rebuilt))


# --------------------------------------------------------------------------
# calculus
# --------------------------------------------------------------------------

def differentiate(e: Expr, s: Symbol) -> Expr:
    """Exact partial derivative; all other symbols held independent."""
    return simplify(_d(simplify(e), s))


def _d(e: Expr, s: Symbol) -> Expr:
    if isinstance(e, Const):
        return ZERO
    if isinstance(e, Sym):
        return ONE if e.symbol == s else ZERO
    if isinstance(e, Add):
        return Add(tuple(_d(t, s) for t in e.terms))
    if isinstance(e, Mul):
        parts = []
        fs = e.factors
        for i in range(len(fs)):
            parts.append(Mul(fs[:i] + (_d(fs[i], s),) + fs[i + 1 :]))
        return Add(tuple(parts))
    if isinstance(e, Pow):
        return Mul((Const(e.exponent), Pow(e.base, e.exponent - 1), _d(e.base, s)))
    if isinstance(e, Div):
        return Div(
            Add((Mul((_d(e.num, s), e.den)), Neg(Mul((e.num, _d(e.den, s)))))),
            Pow(e.den, 2),
        )
    if isinstance(e, Neg):
        return Neg(_d(e.child, s))
    if isinstance(e, Call):
        da = _d(e.arg, s)
        if e.fn == "sin":
            return Mul((Call("cos", e.arg), da))
        if e.fn == "cos":
            return Neg(Mul((Call("sin", e.arg), da)))
        if e.fn == "exp":
            return Mul((Call("exp", e.arg), da))
        return Div(da, e.arg)  # log
    raise TypeError(f"not an expression: {e!r}")


def substitute(e: Expr, replacements: Mapping[Symbol, "Expr | NumberLike"]) -> Expr:
    """Simultaneous, non-recursive substitution followed by simplification."""
    table = {s: as_expr(v) for s, v in replacements.items()}
    return simplify(_sub(e, table))


def _sub(e: Expr, table: Mapping[Symbol, Expr]) -> Expr:
    if isinstance(e, Const):
        return e
    if isinstance(e, Sym):
        return table.get(e.symbol, e)
    if isinstance(e, Add):
        return Add(tuple(_sub(t, table) for t in e.terms))
    if isinstance(e, Mul):
        return Mul(tuple(_sub(f, table) for f in e.factors))
    if isinstance(e, Pow):
        return Pow(_sub(e.base, table), e.exponent)
    if isinstance(e, Div):
        return Div(_sub(e.num, table), _sub(e.den, table))
    if isinstance(e, Neg):
        return Neg(_sub(e.child, table))
    if isinstance(e, Call):
        return Call(e.fn, _sub(e.arg, table))
    raise TypeError(f"not an expression: {e!r}")


Binding = Mapping[Symbol, float]


def evaluate(e: Expr, binding: Binding) -> float:
    """IEEE double value of ``e`` under a full binding."""
    if isinstance(e, Const):
        return float(e.value)
    if isinstance(e, Sym):
        try:
            return float(binding[e.symbol])
        except KeyError:
            raise UnboundSymbolError(e.symbol.name) from None
    if isinstance(e, Add):
        return math.fsum(evaluate(t, binding) for t in e.terms)
    if isinstance(e, Mul):
        out = 1.0
        for f in e.factors:
            out *= evaluate(f, binding)
        return out
    if isinstance(e, Pow):
        b = evaluate(e.base, binding)
        if b == 0.0 and e.exponent < 0:
            raise EvalDomainError("zero raised to a negative power")
        try:
            return b**e.exponent
        except OverflowError:
            raise EvalDomainError("overflow in power") from None
    if isinstance(e, Div):
        den = evaluate(e.den, binding)
        if den == 0.0:
            raise EvalDomainError("division by zero")
        return evaluate(e.num, binding) / den
    if isinstance(e, Neg):
        return -evaluate(e.child, binding)
    if isinstance(e, Call):
        v = evaluate(e.arg, binding)
        if e.fn == "sin":
            return math.sin(v)
        if e.fn == "cos":
            return math.cos(v)
        if e.fn == "exp":
            try:
                return math.exp(v)
            except OverflowError:
                raise EvalDomainError("overflow in exp") from None
        if v <= 0.0:
            raise EvalDomainError("log of a non-positive value")
        return math.log(v)
    raise TypeError(f"not an expression: {e!r}")


# --------------------------------------------------------------------------
# zero testing
# --------------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class ZeroVerdict:
    """Outcome of a zero test: symbolic, numeric, or a refuting witness."""

    kind: str  # "symbolic" | "numeric" | "nonzero"
    witness: dict | None = None
    max_abs: float = 0.0

    @property
    def is_zero(self) -> bool:
        return self.kind != "nonzero"

    def __bool__(self) -> bool:
        return self.is_zero


def is_zero(e: Expr, sampler=None, tol: float = 1e-10, fixed: Binding | None = None) -> ZeroVerdict:
    """Decide whether ``e`` vanishes identically.

    Structural zero wins outright; otherwise the expression is evaluated at
    seeded sample points (``fixed`` pins symbols, e.g. model parameters) and
    judged against ``tol``.  Sample points where the expression is undefined
    are redrawn.
    """
    from .sampling import PointSampler

    s = simplify(e)
    if fixed:
        s = substitute(s, {k: Const(float(v)) for k, v in fixed.items()})
    if isinstance(s, Const):
        if s.value == 0:
            return ZeroVerdict("symbolic")
        v = float(s.value)
        if abs(v) < tol:
            return ZeroVerdict("numeric", max_abs=abs(v))
        return ZeroVerdict("nonzero", witness={}, max_abs=abs(v))
    if sampler is None:
        sampler = PointSampler()
    syms = sorted(free_symbols(s), key=lambda x: x.name)
    from ._kernel import tape

    prog = tape.compile_exprs([s], syms)
    needed = sampler.samples
    collected = 0
    max_abs = 0.0
    rounds = 0
    offset = 0
    while collected < needed:
        rounds += 1
        if rounds > 50:
            raise EvalDomainError("expression undefined at nearly all sample points")
        pts = sampler.matrix(len(syms), needed - collected, offset=offset)
        offset += needed - collected
        vals = prog.eval_many(pts)[:, 0]
        for row, v in zip(pts, vals):
            if not math.isfinite(v):
                continue
            collected += 1
            a = abs(v)
            if a > max_abs:
                max_abs = a
            if a >= tol:
                witness = {sym: float(x) for sym, x in zip(syms, row)}
                return ZeroVerdict("nonzero", witness=witness, max_abs=a)
    return ZeroVerdict("numeric", max_abs=max_abs)


# --------------------------------------------------------------------------
# rendering
# --------------------------------------------------------------------------

def _render_const(v) -> str:
    if isinstance(v, Fraction):
        return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
    return repr(v)


def _needs_parens_in_product(f: Expr) -> bool:
    if isinstance(f, (Add, Div, Neg)):
        return True
    if isinstance(f, Const):
        return float(f.value) < 0
    return False


def _pow_base(e: Expr) -> str:
    if isinstance(e, (Add, Mul, Div, Neg, Pow)) or (
        isinstance(e, Const) and (float(e.value) < 0 or
                                  (isinstance(e.value, Fraction) and e.value.denominator != 1))
    ):
        return f"({render(e)})"
    return render(e)


def _term_with_sign(t: Expr):
    """Split a normal-form term into (sign, rendered magnitude)."""
    if isinstance(t, Const) and float(t.value) < 0:
        return "-", _render_const(-t.value)
    if isinstance(t, Mul) and isinstance(t.factors[0], Const) and float(t.factors[0].value) < 0:
        c = t.factors[0]
        mag_c = Const(-c.value)
        rest = t.factors[1:]
        if mag_c.value == 1:
            body = rest[0] if len(rest) == 1 else Mul(rest)
        else:
            body = Mul((mag_c,) + rest)
        return "-", render(body)
    if isinstance(t, Neg):
        return "-", render(t.child)
    return "+", render(t)


def render(e: Expr) -> str:
    """Source form in the grammar ``parse`` accepts; round-trips structurally."""
    if isinstance(e, Const):
        return _render_const(e.value)
    if isinstance(e, Sym):
        return e.symbol.name
    if isinstance(e, Add):
        sign, body = _term_with_sign(e.terms[0])
        out = body if sign == "+" else "-" + body
        for t in e.terms[1:]:
            sign, body = _term_with_sign(t)
            out += f" {sign} {body}"
        return out
    if isinstance(e, Mul):
        if isinstance(e.factors[0], Const) and float(e.factors[0].value) < 0:
            sign, body = _term_with_sign(e)
            return "-" + body
        parts = []
        for f in e.factors:
            r = render(f)
            parts.append(f"({r})" if _needs_parens_in_product(f) else r)
        return "*".join(parts)
    if isinstance(e, Pow):
        return f"{_pow_base(e.base)}^{e.exponent}"
    if isinstance(e, Div):
        num = render(e.num)
        if isinstance(e.num, (Add, Neg, Div)):
            num = f"({num})"
        den = render(e.den)
        if isinstance(e.den, (Add, Mul, Div, Neg)) or (
            isinstance(e.den, Const) and float(e.den.value) < 0
        ):
            den = f"({den})"
        return f"{num}/{den}"
    if isinstance(e, Neg):
        body = render(e.child)
        if isinstance(e.child, (Add, Neg)):
            body = f"({body})"
        return f"-{body}"
    if isinstance(e, Call):
        return f"{e.fn}({render(e.arg)})"
    raise TypeError(f"not an expression: {e!r}")
