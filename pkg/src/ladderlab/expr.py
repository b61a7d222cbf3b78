"""Expression trees over one spatial variable ``x`` and named parameters.

Expressions are immutable; all construction goes through the smart
constructors (:func:`add`, :func:`mul`, :func:`neg`, :func:`power`, ...)
which flatten nested sums/products and fold constants.  Nothing else is
simplified: trig and exponential identities are left alone and equality of
two expressions is decided numerically with :func:`approx_equal`.

Grammar accepted by :func:`parse`::

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := '-' factor | atom ('^' atom)?
    atom   := number | ident | '(' expr ')' | ident '(' expr ')'

``x`` is the spatial variable, ``exp``/``sin``/``cos`` are functions and
every other identifier is a parameter.
"""
from __future__ import annotations

import math
import re
from collections.abc import Iterable, Mapping
from dataclasses import dataclass
from typing import Union

import numpy as np

ENERGY = "ENERGY"
FUNCTIONS = ("exp", "sin", "cos")

Number = Union[int, float]


class ExprError(Exception):
    """Base class for expression errors."""


class ParseError(ExprError, ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class UnboundParameterError(ExprError, LookupError):
    def __init__(self, name: str):
        super().__init__(f"unbound parameter {name!r}")
        self.name = name


class DomainError(ExprError, ArithmeticError):
    def __init__(self, message: str, point: float | None = None):
        super().__init__(message if point is None else f"{message} at x={point!r}")
        self.point = point


class InconclusiveError(DomainError):
    """Raised by :func:`approx_equal` when a sample point cannot be evaluated."""


# ----------------------------------------------------------------------------
# AST nodes


class Expr:
    __slots__ = ()

    def __add__(self, other):
        return add(self, as_expr(other))

    def __radd__(self, other):
        return add(as_expr(other), self)

    def __sub__(self, other):
        return add(self, neg(as_expr(other)))

    def __rsub__(self, other):
        return add(as_expr(other), neg(self))

    def __mul__(self, other):
        return mul(self, as_expr(other))

    def __rmul__(self, other):
        return mul(as_expr(other), self)

    def __truediv__(self, other):
        return div(self, as_expr(other))

    def __rtruediv__(self, other):
        return div(as_expr(other), self)

    def __pow__(self, other):
        return power(self, as_expr(other))

    def __neg__(self):
        return neg(self)

    def __str__(self):
        return to_string(self)


@dataclass(frozen=True, repr=True)
class Const(Expr):
    value: float


@dataclass(frozen=True, repr=True)
class Var(Expr):
    pass


@dataclass(frozen=True, repr=True)
class Param(Expr):
    name: str


@dataclass(frozen=True, repr=True)
class Sum(Expr):
    terms: tuple


@dataclass(frozen=True, repr=True)
class Product(Expr):
    factors: tuple


@dataclass(frozen=True, repr=True)
class Power(Expr):
    base: Expr
    exponent: Expr


@dataclass(frozen=True, repr=True)
class Exp(Expr):
    arg: Expr


@dataclass(frozen=True, repr=True)
class Sin(Expr):
    arg: Expr


@dataclass(frozen=True, repr=True)
class Cos(Expr):
    arg: Expr


@dataclass(frozen=True, repr=True)
class Neg(Expr):
    arg: Expr


X = Var()
ZERO = Const(0.0)
ONE = Const(1.0)


def as_expr(value) -> Expr:
    if isinstance(value, Expr):
        return value
    if isinstance(value, str):
        return parse(value)
    return Const(float(value))


# ----------------------------------------------------------------------------
# smart constructors


def neg(e: Expr) -> Expr:
    if isinstance(e, Const):
        return Const(-e.value)
    if isinstance(e, Neg):
        return e.arg
    if isinstance(e, Product) and isinstance(e.factors[0], Const):
        return mul(Const(-e.factors[0].value), *e.factors[1:])
    if isinstance(e, Product):
        return mul(Const(-1.0), *e.factors)
    if isinstance(e, Sum):
        return add(*(neg(t) for t in e.terms))
    return Neg(e)


def _split_coeff(e: Expr) -> tuple[float, Expr]:
    if isinstance(e, Neg):
        c, rest = _split_coeff(e.arg)
        return -c, rest
    if isinstance(e, Product) and isinstance(e.factors[0], Const):
        rest = e.factors[1:]
        return e.factors[0].value, rest[0] if len(rest) == 1 else Product(rest)
    return 1.0, e


def add(*terms: Expr) -> Expr:
    # like terms (equal up to a constant factor) are merged
    coeffs: dict[Expr, float] = {}
    const = 0.0
    for t in terms:
        parts = t.terms if isinstance(t, Sum) else (t,)
        for p in parts:
            if isinstance(p, Const):
                const += p.value
            else:
                c, rest = _split_coeff(p)
                coeffs[rest] = coeffs.get(rest, 0.0) + c
    flat = [mul(Const(c), rest) for rest, c in coeffs.items() if c != 0.0]
    if const != 0.0:
        flat.append(Const(const))
    if not flat:
        return ZERO
    if len(flat) == 1:
        return flat[0]
    return Sum(tuple(flat))


def mul(*factors: Expr) -> Expr:
    flat: list[Expr] = []
    const = 1.0
    for f in factors:
        parts = f.factors if isinstance(f, Product) else (f,)
        for p in parts:
            while isinstance(p, Neg):
                const = -const
                p = p.arg
            if isinstance(p, Const):
                const *= p.value
            elif isinstance(p, Product):
                # a Neg may have wrapped a product built elsewhere
                for q in p.factors:
                    if isinstance(q, Const):
                        const *= q.value
                    else:
                        flat.append(q)
            else:
                flat.append(p)
    if const == 0.0:
        return ZERO
    if not flat:
        return Const(const)
    if const == 1.0:
        return flat[0] if len(flat) == 1 else Product(tuple(flat))
    if const == -1.0 and len(flat) == 1:
        return Neg(flat[0])
    return Product((Const(const), *flat))


def power(base: Expr, exponent: Expr) -> Expr:
    if depends_on_x(exponent):
        raise ExprError("exponent must not depend on x")
    if isinstance(exponent, Const):
        if exponent.value == 0.0:
            return ONE
        if exponent.value == 1.0:
            return base
        if isinstance(base, Const):
            with np.errstate(all="ignore"):
                v = np.power(base.value, exponent.value)
            if np.isfinite(v):
                return Const(float(v))
    if isinstance(base, Const) and base.value == 1.0:
        return ONE
    return Power(base, exponent)


def div(num: Expr, den: Expr) -> Expr:
    return mul(num, power(den, Const(-1.0)))


def exp(e: Expr) -> Expr:
    if isinstance(e, Const):
        return Const(math.exp(e.value))
    return Exp(e)


def sin(e: Expr) -> Expr:
    if isinstance(e, Const):
        return Const(math.sin(e.value))
    return Sin(e)


def cos(e: Expr) -> Expr:
    if isinstance(e, Const):
        return Const(math.cos(e.value))
    return Cos(e)


def sqrt(e: Expr) -> Expr:
    return power(e, Const(0.5))


_BUILD = {"exp": exp, "sin": sin, "cos": cos}


# ----------------------------------------------------------------------------
# structural queries


def children(e: Expr) -> tuple:
    if isinstance(e, Sum):
        return e.terms
    if isinstance(e, Product):
        return e.factors
    if isinstance(e, Power):
        return (e.base, e.exponent)
    if isinstance(e, (Exp, Sin, Cos, Neg)):
        return (e.arg,)
    return ()


def depends_on_x(e: Expr) -> bool:
    if isinstance(e, Var):
        return True
    return any(depends_on_x(c) for c in children(e))


def free_params(e: Expr) -> set[str]:
    if isinstance(e, Param):
        return {e.name}
    out: set[str] = set()
    for c in children(e):
        out |= free_params(c)
    return out


def rebuild(e: Expr, kids: tuple) -> Expr:
    if isinstance(e, Sum):
        return add(*kids)
    if isinstance(e, Product):
        return mul(*kids)
    if isinstance(e, Power):
        return power(*kids)
    if isinstance(e, Neg):
        return neg(kids[0])
    if isinstance(e, (Exp, Sin, Cos)):
        return _BUILD[type(e).__name__.lower()](kids[0])
    return e


def substitute(e: Expr, values: Mapping[str, Expr | Number]) -> Expr:
    """Replace parameters by expressions (or numbers), refolding constants."""
    if isinstance(e, Param):
        if e.name in values:
            return as_expr(values[e.name])
        return e
    kids = children(e)
    if not kids:
        return e
    return rebuild(e, tuple(substitute(k, values) for k in kids))


# ----------------------------------------------------------------------------
# differentiation


def diff(e: Expr) -> Expr:
    """Exact derivative with respect to ``x``."""
    if isinstance(e, (Const, Param)):
        return ZERO
    if isinstance(e, Var):
        return ONE
    if isinstance(e, Sum):
        return add(*(diff(t) for t in e.terms))
    if isinstance(e, Product):
        fs = e.factors
        terms = []
        for i, f in enumerate(fs):
            df = diff(f)
            if df != ZERO:
                terms.append(mul(*fs[:i], df, *fs[i + 1:]))
        return add(*terms)
    if isinstance(e, Power):
        db = diff(e.base)
        if db == ZERO:
            return ZERO
        return mul(e.exponent, power(e.base, add(e.exponent, Const(-1.0))), db)
    if isinstance(e, Exp):
        return mul(e, diff(e.arg))
    if isinstance(e, Sin):
        return mul(cos(e.arg), diff(e.arg))
    if isinstance(e, Cos):
        return mul(Const(-1.0), sin(e.arg), diff(e.arg))
    if isinstance(e, Neg):
        return neg(diff(e.arg))
    raise TypeError(f"not an expression: {e!r}")


def diff_n(e: Expr, n: int) -> Expr:
    for _ in range(n):
        e = diff(e)
    return e


# ----------------------------------------------------------------------------
# parameter binding and evaluation


class ParamBinding(Mapping):
    """Immutable name -> float map used to evaluate expressions.

    ``ENERGY`` may only be present when ``allow_energy`` is set; it marks the
    places where an eigenvalue is substituted for the Hamiltonian.
    """

    def __init__(self, values: Mapping[str, float] | Iterable[tuple[str, float]] = (),
                 *, allow_energy: bool = False):
        items = values.items() if isinstance(values, Mapping) else values
        data: dict[str, float] = {}
        for name, value in items:
            if name in data:
                raise ValueError(f"duplicate parameter {name!r}")
            if name == ENERGY and not allow_energy:
                raise ValueError("ENERGY is reserved for energy slots")
            if name == "x" or name in FUNCTIONS:
                raise ValueError(f"{name!r} cannot be bound as a parameter")
            data[name] = float(value)
        self._data = data
        self.allow_energy = allow_energy

    def __getitem__(self, key):
        return self._data[key]

    def __iter__(self):
        return iter(self._data)

    def __len__(self):
        return len(self._data)

    def __repr__(self):
        return f"ParamBinding({self._data!r})"

    def with_energy(self, energy: float) -> "ParamBinding":
        data = {k: v for k, v in self._data.items() if k != ENERGY}
        data[ENERGY] = energy
        return ParamBinding(data, allow_energy=True)

    def updated(self, **values: float) -> "ParamBinding":
        data = dict(self._data)
        data.update(values)
        return ParamBinding(data, allow_energy=self.allow_energy)


def _bad_point(x, mask) -> float:
    if np.ndim(x) == 0:
        return float(x)
    return float(np.asarray(x)[np.argmax(np.broadcast_to(mask, np.shape(x)))])


def _eval(e: Expr, x, env: Mapping[str, float]):
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Var):
        return x
    if isinstance(e, Param):
        try:
            return env[e.name]
        except KeyError:
            raise UnboundParameterError(e.name) from None
    if isinstance(e, Sum):
        out = _eval(e.terms[0], x, env)
        for t in e.terms[1:]:
            out = out + _eval(t, x, env)
        return out
    if isinstance(e, Product):
        out = _eval(e.factors[0], x, env)
        for f in e.factors[1:]:
            out = out * _eval(f, x, env)
        return out
    if isinstance(e, Power):
        b = _eval(e.base, x, env)
        p = _eval(e.exponent, x, env)
        with np.errstate(all="ignore"):
            if isinstance(p, float) and p == 2.0:
                out = b * b
            elif isinstance(p, float) and p == -1.0:
                out = 1.0 / b
            else:
                out = np.power(b, p)
        bad = np.isfinite(b) & ~np.isfinite(out)
        if np.any(bad):
            raise DomainError("invalid power", _bad_point(x, bad))
        return out
    if isinstance(e, Exp):
        with np.errstate(over="ignore"):
            return np.exp(_eval(e.arg, x, env))
    if isinstance(e, Sin):
        return np.sin(_eval(e.arg, x, env))
    if isinstance(e, Cos):
        return np.cos(_eval(e.arg, x, env))
    if isinstance(e, Neg):
        return -_eval(e.arg, x, env)
    raise TypeError(f"not an expression: {e!r}")


def evaluate(e: Expr, x, binding: Mapping[str, float] | None = None):
    """Evaluate ``e`` at ``x`` (scalar or array).

    Raises :class:`UnboundParameterError` for missing parameters and
    :class:`DomainError` when the result is not finite.
    """
    env = {} if binding is None else binding
    xa = np.asarray(x, dtype=float)
    scalar = xa.ndim == 0
    with np.errstate(invalid="ignore", divide="ignore"):
        out = _eval(e, float(xa) if scalar else xa, env)
    out = np.broadcast_to(np.asarray(out, dtype=float), xa.shape)
    if not np.all(np.isfinite(out)):
        raise DomainError("non-finite value", _bad_point(xa, ~np.isfinite(out)))
    return float(out) if scalar else np.array(out)


# ----------------------------------------------------------------------------
# probabilistic identity testing


@dataclass(frozen=True)
class ApproxResult:
    equal: bool
    max_residual: float
    worst_point: float
    samples: int

    def __bool__(self):
        return self.equal


def sample_points(domain: tuple[float, float], samples: int, seed: int = 0,
                  exclude: Iterable[tuple[float, float]] = ()) -> np.ndarray:
    lo, hi = map(float, domain)
    if not hi > lo:
        raise ValueError(f"empty domain {domain!r}")
    exclude = list(exclude)
    rng = np.random.default_rng(seed)
    pts: list[float] = []
    for _ in range(1000):
        cand = rng.uniform(lo, hi, size=samples)
        for p in cand:
            if all(abs(p - c) > r for c, r in exclude):
                pts.append(float(p))
        if len(pts) >= samples:
            return np.sort(np.array(pts[:samples]))
    raise ValueError("exclusion radii cover the whole domain")


def residual_profile(e1: Expr, e2: Expr, points: np.ndarray,
                     binding: Mapping[str, float] | None = None) -> np.ndarray:
    """Pointwise |e1 - e2| / (1 + max(|e1|, |e2|))."""
    pts = np.asarray(points, dtype=float)
    try:
        a = evaluate(e1, pts, binding)
        b = evaluate(e2, pts, binding)
    except DomainError as err:
        raise InconclusiveError("inconclusive", err.point) from err
    return np.abs(a - b) / (1.0 + np.maximum(np.abs(a), np.abs(b)))


def approx_equal(e1: Expr, e2: Expr, domain: tuple[float, float] = (-1.0, 1.0),
                 samples: int = 50, tol: float = 1e-10,
                 binding: Mapping[str, float] | None = None, seed: int = 0,
                 exclude: Iterable[tuple[float, float]] = ()) -> ApproxResult:
    """Randomised identity test of two expressions on an interval.

    True iff ``|e1 - e2| <= tol * (1 + max(|e1|, |e2|))`` at every sampled
    point.  Points are drawn from ``domain`` with a fixed seed; ``exclude``
    lists ``(center, radius)`` neighbourhoods of singular points to avoid.
    """
    pts = sample_points(domain, samples, seed, exclude)
    res = residual_profile(e1, e2, pts, binding)
    i = int(np.argmax(res))
    return ApproxResult(bool(res[i] <= tol), float(res[i]), float(pts[i]), samples)


# ----------------------------------------------------------------------------
# printing


def _fmt_number(v: float) -> str:
    if not math.isfinite(v):
        raise ExprError(f"cannot print non-finite constant {v!r}")
    if v == int(v) and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


def _is_atom(e: Expr) -> bool:
    if isinstance(e, Const):
        return e.value >= 0
    return isinstance(e, (Var, Param, Exp, Sin, Cos))


def _atom(e: Expr) -> str:
    s = to_string(e)
    return s if _is_atom(e) else f"({s})"


def _factor_str(e: Expr) -> str:
    # operand of '*' or '/': anything tighter than a product prints bare
    if _is_atom(e) or isinstance(e, Power):
        return to_string(e)
    return f"({to_string(e)})"


def _is_reciprocal(e: Expr) -> bool:
    return isinstance(e, Power) and e.exponent == Const(-1.0)


def _product_str(factors: tuple) -> str:
    out = ""
    for i, f in enumerate(factors):
        if _is_reciprocal(f):
            out += ("1" if i == 0 else "") + "/" + _factor_str(f.base)
        else:
            out += ("" if i == 0 else "*") + _factor_str(f)
    return out


def _negated_str(e: Expr) -> str | None:
    """Text of -e when ``e`` reads naturally with a leading minus."""
    if isinstance(e, Neg):
        return _factor_str(e.arg)
    if isinstance(e, Const) and e.value < 0:
        return _fmt_number(-e.value)
    if isinstance(e, Product) and isinstance(e.factors[0], Const) and e.factors[0].value < 0:
        c = -e.factors[0].value
        rest = e.factors[1:]
        if c == 1.0:
            if len(rest) == 1:
                # "-f" alone would reparse as Neg(f), not Product(-1, f)
                return None
            return _product_str(rest)
        return _fmt_number(c) + ("*" if not _is_reciprocal(rest[0]) else "") + _product_str(rest)
    return None


def to_string(e: Expr) -> str:
    """Canonical text form; ``parse(to_string(e)) == e`` for canonical ``e``."""
    if isinstance(e, Const):
        return _fmt_number(e.value)
    if isinstance(e, Var):
        return "x"
    if isinstance(e, Param):
        return e.name
    if isinstance(e, (Exp, Sin, Cos)):
        return f"{type(e).__name__.lower()}({to_string(e.arg)})"
    if isinstance(e, Neg):
        return "-" + _factor_str(e.arg)
    if isinstance(e, Power):
        return f"{_atom(e.base)}^{_atom(e.exponent)}"
    if isinstance(e, Product):
        neg_s = _negated_str(e)
        if neg_s is not None:
            return "-" + neg_s
        if isinstance(e.factors[0], Const):
            c = e.factors[0]
            body = _product_str(e.factors[1:])
            sep = "" if _is_reciprocal(e.factors[1]) else "*"
            return f"{to_string(c)}{sep}{body}"
        return _product_str(e.factors)
    if isinstance(e, Sum):
        parts = []
        for i, t in enumerate(e.terms):
            n = _negated_str(t)
            if i == 0:
                parts.append(to_string(t))
            elif n is not None:
                parts.append(" - " + n)
            else:
                parts.append(" + " + to_string(t))
        return "".join(parts)
    raise TypeError(f"not an expression: {e!r}")


# ----------------------------------------------------------------------------
# parsing

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<id>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[-+*/^()]))"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    toks = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        start = m.start(kind)
        toks.append((kind, m.group(kind), start))
        pos = m.end()
    toks.append(("end", "", n))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, op: str):
        kind, val, pos = self.take()
        if kind != "op" or val != op:
            raise ParseError(f"expected {op!r}", pos)

    def expr(self) -> Expr:
        node = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.take()[1]
            rhs = self.term()
            node = add(node, rhs if op == "+" else neg(rhs))
        return node

    def term(self) -> Expr:
        node = self.factor()
        while self.peek()[0] == "op" and self.peek()[1] in "*/":
            op = self.take()[1]
            rhs = self.factor()
            node = mul(node, rhs) if op == "*" else div(node, rhs)
        return node

    def factor(self) -> Expr:
        kind, val, pos = self.peek()
        if kind == "op" and val == "-":
            self.take()
            return neg(self.factor())
        base = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            epos = self.peek()[2]
            expo = self.atom()
            if depends_on_x(expo):
                raise ParseError("exponent depends on x", epos)
            return power(base, expo)
        return base

    def atom(self) -> Expr:
        kind, val, pos = self.take()
        if kind == "num":
            return Const(float(val))
        if kind == "id":
            if val in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return _BUILD[val](arg)
            if self.peek()[0] == "op" and self.peek()[1] == "(":
                raise ParseError(f"unknown function {val!r}", pos)
            return X if val == "x" else Param(val)
        if kind == "op" and val == "(":
            node = self.expr()
            self.expect(")")
            return node
        if kind == "end":
            raise ParseError("unexpected end of input", pos)
        raise ParseError(f"unexpected {val!r}", pos)


def parse(text: str) -> Expr:
    """Parse ``text`` into an expression (see module docstring for grammar)."""
    p = _Parser(text)
    node = p.expr()
    kind, val, pos = p.peek()
    if kind != "end":
        raise ParseError(f"unexpected {val!r}", pos)
    return node
