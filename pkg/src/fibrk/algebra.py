"""Exact arithmetic: rationals, sparse multivariate polynomials, rational functions in ``j``.

Rationals are :class:`fractions.Fraction`. A :class:`SparsePoly` maps monomials
to nonzero ``Fraction`` coefficients, where a monomial is a sorted tuple of
``(variable, exponent)`` pairs with positive exponents. The empty tuple is the
constant monomial.

Two variable names are reserved: ``j`` (the twist parameter) and ``eps``
(the deformation parameter). All other names are free parameters that a
datum must declare.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from functools import reduce
from typing import Dict, Iterable, Iterator, Mapping, Tuple, Union

from .errors import (
    MixedVariableDivision,
    SchemaError,
    ZeroDivisor,
    ZeroPolynomial,
)

J = "j"
EPS = "eps"

Monomial = Tuple[Tuple[str, int], ...]
Scalar = Union[int, Fraction]

_ONE: Monomial = ()


def scalar(value) -> Fraction:
    """Coerce ``value`` (int, Fraction, or ``"p/q"`` string) to a Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if not re.fullmatch(r"[+-]?\d+(/\d+)?", text):
            raise ValueError(f"not a rational literal: {value!r}")
        return Fraction(text)
    raise TypeError(f"cannot use {type(value).__name__} as an exact scalar")


def format_scalar(value: Fraction) -> str:
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    exps = dict(a)
    for v, e in b:
        exps[v] = exps.get(v, 0) + e
    return tuple(sorted(exps.items()))


def _mono_from_dict(exps: Mapping[str, int]) -> Monomial:
    out = []
    for v, e in exps.items():
        if not isinstance(e, int) or isinstance(e, bool) or e < 0:
            raise ValueError(f"exponent of {v!r} must be a nonnegative integer, got {e!r}")
        if e:
            out.append((v, e))
    return tuple(sorted(out))


class SparsePoly:
    """Immutable sparse polynomial with exact rational coefficients."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[Monomial, Scalar] | None = None):
        clean: Dict[Monomial, Fraction] = {}
        if terms:
            for mono, c in terms.items():
                c = scalar(c)
                if c:
                    clean[mono] = c
        self._terms = clean
        self._hash = None

    # construction

    @classmethod
    def const(cls, value: Scalar) -> "SparsePoly":
        return cls({_ONE: value})

    @classmethod
    def var(cls, name: str, power: int = 1) -> "SparsePoly":
        return cls({((name, power),) if power else _ONE: 1})

    @classmethod
    def monomial(cls, exps: Mapping[str, int], coeff: Scalar = 1) -> "SparsePoly":
        return cls({_mono_from_dict(exps): coeff})

    @classmethod
    def _raw(cls, terms: Dict[Monomial, Fraction]) -> "SparsePoly":
        p = cls.__new__(cls)
        p._terms = terms
        p._hash = None
        return p

    # inspection

    @property
    def terms(self) -> Mapping[Monomial, Fraction]:
        return self._terms

    def items(self) -> Iterator[Tuple[Monomial, Fraction]]:
        return iter(self._terms.items())

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self) -> bool:
        return bool(self._terms)

    def is_constant(self) -> bool:
        return all(m == _ONE for m in self._terms)

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise ValueError(f"{self} is not a constant")
        return self._terms.get(_ONE, Fraction(0))

    def variables(self) -> frozenset:
        return frozenset(v for m in self._terms for v, _ in m)

    def degree(self, var: str | None = None) -> int:
        """Degree in ``var`` (total degree if ``None``); -1 for the zero polynomial."""
        if not self._terms:
            return -1
        if var is None:
            return max(sum(e for _, e in m) for m in self._terms)
        return max(dict(m).get(var, 0) for m in self._terms)

    def min_degree(self, var: str) -> int:
        if not self._terms:
            raise ZeroPolynomial("zero polynomial has no minimal degree")
        return min(dict(m).get(var, 0) for m in self._terms)

    def coefficients_in(self, var: str) -> Dict[int, "SparsePoly"]:
        """Group terms by the exponent of ``var``; values are free of ``var``."""
        groups: Dict[int, Dict[Monomial, Fraction]] = {}
        for mono, c in self._terms.items():
            e = 0
            rest = []
            for v, k in mono:
                if v == var:
                    e = k
                else:
                    rest.append((v, k))
            groups.setdefault(e, {})[tuple(rest)] = c
        return {e: SparsePoly._raw(t) for e, t in groups.items()}

    def coefficient(self, var: str, exponent: int) -> "SparsePoly":
        return self.coefficients_in(var).get(exponent, ZERO)

    # arithmetic

    @staticmethod
    def _lift(other) -> "SparsePoly":
        if isinstance(other, SparsePoly):
            return other
        return SparsePoly.const(scalar(other))

    def __add__(self, other) -> "SparsePoly":
        other = self._lift(other)
        out = dict(self._terms)
        for m, c in other._terms.items():
            s = out.get(m, 0) + c
            if s:
                out[m] = s
            else:
                out.pop(m, None)
        return SparsePoly._raw(out)

    __radd__ = __add__

    def __neg__(self) -> "SparsePoly":
        return SparsePoly._raw({m: -c for m, c in self._terms.items()})

    def __sub__(self, other) -> "SparsePoly":
        return self + (-self._lift(other))

    def __rsub__(self, other) -> "SparsePoly":
        return self._lift(other) - self

    def __mul__(self, other) -> "SparsePoly":
        if not isinstance(other, SparsePoly):
            k = scalar(other)
            if not k:
                return ZERO
            return SparsePoly._raw({m: c * k for m, c in self._terms.items()})
        out: Dict[Monomial, Fraction] = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                m = _mono_mul(m1, m2)
                s = out.get(m, 0) + c1 * c2
                if s:
                    out[m] = s
                else:
                    out.pop(m, None)
        return SparsePoly._raw(out)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "SparsePoly":
        """Division by a nonzero scalar (or constant polynomial) only."""
        if isinstance(other, SparsePoly):
            if not other.is_constant():
                raise TypeError("use poly_div_rem for polynomial division")
            other = other.constant_value()
        k = scalar(other)
        if not k:
            raise ZeroDivisor("division by zero")
        return self * (1 / k)

    def __pow__(self, n: int) -> "SparsePoly":
        if not isinstance(n, int) or n < 0:
            raise ValueError("exponent must be a nonnegative integer")
        result = ONE
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    # comparison

    def __eq__(self, other) -> bool:
        if isinstance(other, SparsePoly):
            return self._terms == other._terms
        try:
            return self._terms == SparsePoly.const(scalar(other))._terms
        except (TypeError, ValueError):
            return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    # transformations

    def subs(self, values: Mapping[str, "SparsePoly | Scalar"]) -> "SparsePoly":
        """Substitute polynomials or scalars for variables."""
        if not values:
            return self
        vals = {k: self._lift(v) for k, v in values.items()}
        out = ZERO
        power_cache: Dict[Tuple[str, int], SparsePoly] = {}
        for mono, c in self._terms.items():
            term = SparsePoly.const(c)
            keep = []
            for v, e in mono:
                if v in vals:
                    key = (v, e)
                    if key not in power_cache:
                        power_cache[key] = vals[v] ** e
                    term = term * power_cache[key]
                else:
                    keep.append((v, e))
            if keep:
                term = term * SparsePoly({tuple(keep): 1})
            out = out + term
        return out

    def truncate(self, var: str, order: int) -> "SparsePoly":
        """Drop every term whose ``var``-exponent exceeds ``order``."""
        return SparsePoly._raw(
            {m: c for m, c in self._terms.items() if dict(m).get(var, 0) <= order}
        )

    def shift(self, var: str, amount: Scalar) -> "SparsePoly":
        """Return ``p(var + amount)``."""
        return self.subs({var: SparsePoly.var(var) + amount})

    def sorted_terms(self) -> list:
        return sorted(self._terms.items(), key=lambda mc: (-sum(e for _, e in mc[0]), mc[0]))

    # serialization

    def to_json(self) -> list:
        return [
            {"exponents": dict(m), "coeff": format_scalar(c)}
            for m, c in sorted(self._terms.items(), key=lambda mc: mc[0])
        ]

    @classmethod
    def from_json(cls, data, declared: Iterable[str] | None = None, pointer: str = "") -> "SparsePoly":
        """Load a polynomial from its JSON form.

        Accepts the canonical array form, a rational literal (string or int),
        or an expression string such as ``"3*t*eps^2 - 1/2*u"``.
        """
        allowed = None if declared is None else frozenset(declared)
        if isinstance(data, bool):
            raise SchemaError("expected a polynomial", pointer)
        if isinstance(data, int):
            return cls.const(data)
        if isinstance(data, str):
            try:
                p = parse_poly(data)
            except ValueError as exc:
                raise SchemaError(str(exc), pointer) from None
            _check_declared(p, allowed, pointer)
            return p
        if not isinstance(data, list):
            raise SchemaError("expected a polynomial (array of terms or string)", pointer)
        out = ZERO
        for i, term in enumerate(data):
            where = f"{pointer}/{i}"
            if not isinstance(term, dict) or set(term) != {"exponents", "coeff"}:
                raise SchemaError("term must have exactly 'exponents' and 'coeff'", where)
            exps = term["exponents"]
            if not isinstance(exps, dict):
                raise SchemaError("exponents must be an object", where + "/exponents")
            try:
                mono = _mono_from_dict(exps)
                c = scalar(term["coeff"])
            except (ValueError, TypeError) as exc:
                raise SchemaError(str(exc), where) from None
            piece = cls({mono: c})
            _check_declared(piece, allowed, where)
            out = out + piece
        return out

    def __repr__(self) -> str:
        return f"SparsePoly({str(self)!r})"

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for mono, c in self.sorted_terms():
            body = "*".join(v if e == 1 else f"{v}^{e}" for v, e in mono)
            mag = abs(c)
            if not body:
                txt = format_scalar(mag)
            elif mag == 1:
                txt = body
            else:
                txt = f"{format_scalar(mag)}*{body}"
            parts.append(("-" if c < 0 else "+", txt))
        first_sign, first = parts[0]
        out = ("-" if first_sign == "-" else "") + first
        for sign, txt in parts[1:]:
            out += f" {sign} {txt}"
        return out


def _check_declared(p: SparsePoly, allowed, pointer: str) -> None:
    if allowed is None:
        return
    extra = sorted(p.variables() - allowed)
    if extra:
        from .errors import UndeclaredVariable

        raise UndeclaredVariable(f"undeclared variable(s) {', '.join(extra)}", pointer)


ZERO = SparsePoly()
ONE = SparsePoly.const(1)


def as_poly(value) -> SparsePoly:
    return SparsePoly._lift(value)


# ---------------------------------------------------------------- parsing

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|(\*\*|[-+*/^()]))")


def parse_poly(text: str) -> SparsePoly:
    """Parse a polynomial expression with rational coefficients.

    Supports ``+ - * / ^ **`` and parentheses; division only by integer
    literals.
    """
    tokens = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ValueError(f"cannot parse polynomial {text!r} at offset {pos}")
        pos = m.end()
        num, name, op = m.groups()
        if num is not None:
            tokens.append(("num", int(num)))
        elif name is not None:
            tokens.append(("name", name))
        else:
            tokens.append(("op", "^" if op == "**" else op))
    if not tokens:
        raise ValueError("empty polynomial expression")
    parser = _Parser(tokens, text)
    result = parser.expr()
    if parser.i != len(tokens):
        raise ValueError(f"trailing input in polynomial {text!r}")
    return result


class _Parser:
    def __init__(self, tokens, text):
        self.tokens = tokens
        self.text = text
        self.i = 0

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else (None, None)

    def take(self):
        tok = self.peek()
        self.i += 1
        return tok

    def fail(self):
        raise ValueError(f"malformed polynomial {self.text!r}")

    def expr(self) -> SparsePoly:
        sign = 1
        if self.peek() in (("op", "+"), ("op", "-")):
            sign = -1 if self.take()[1] == "-" else 1
        acc = self.term() * sign
        while self.peek() in (("op", "+"), ("op", "-")):
            op = self.take()[1]
            t = self.term()
            acc = acc + t if op == "+" else acc - t
        return acc

    def term(self) -> SparsePoly:
        acc = self.power()
        while self.peek() in (("op", "*"), ("op", "/")):
            op = self.take()[1]
            if op == "*":
                acc = acc * self.power()
            else:
                kind, val = self.take()
                if kind != "num" or val == 0:
                    self.fail()
                acc = acc / val
        return acc

    def power(self) -> SparsePoly:
        base = self.atom()
        if self.peek() == ("op", "^"):
            self.take()
            kind, val = self.take()
            if kind != "num":
                self.fail()
            base = base ** val
        return base

    def atom(self) -> SparsePoly:
        kind, val = self.take()
        if kind == "num":
            return SparsePoly.const(val)
        if kind == "name":
            return SparsePoly.var(val)
        if (kind, val) == ("op", "("):
            inner = self.expr()
            if self.take() != ("op", ")"):
                self.fail()
            return inner
        if (kind, val) == ("op", "-"):
            return -self.atom()
        self.fail()


# ------------------------------------------------------ univariate in j


def _check_univariate(den: SparsePoly, var: str) -> None:
    extra = den.variables() - {var}
    if extra:
        raise MixedVariableDivision(
            f"divisor must involve only {var!r}; found {', '.join(sorted(extra))}"
        )


def poly_div_rem(num: SparsePoly, den: SparsePoly, var: str = J) -> Tuple[SparsePoly, SparsePoly]:
    """Long division in ``var``: ``num = q*den + r`` with ``deg_var(r) < deg_var(den)``.

    The divisor must be free of every other variable; the dividend's
    coefficients may involve other variables.
    """
    if den.is_zero():
        raise ZeroDivisor("polynomial division by zero")
    _check_univariate(den, var)
    dcoef = {e: c.constant_value() for e, c in den.coefficients_in(var).items()}
    ddeg = max(dcoef)
    lead = dcoef[ddeg]
    rem = dict(num.coefficients_in(var))
    quot: Dict[int, SparsePoly] = {}
    x = SparsePoly.var(var)
    top = max(rem) if rem else -1
    for e in range(top, ddeg - 1, -1):
        c = rem.pop(e, None)
        if c is None or c.is_zero():
            continue
        qc = c / lead
        shift = e - ddeg
        quot[shift] = qc
        for de, dc in dcoef.items():
            if de == ddeg:
                continue
            k = de + shift
            rem[k] = rem.get(k, ZERO) - qc * dc
    q = sum((c * x ** e for e, c in quot.items()), ZERO)
    r = sum((c * x ** e for e, c in rem.items()), ZERO)
    return q, r


def _leading(p: SparsePoly, var: str) -> Fraction:
    return p.coefficient(var, p.degree(var)).constant_value()


def poly_gcd(a: SparsePoly, b: SparsePoly, var: str = J) -> SparsePoly:
    """Monic gcd of two polynomials in ``var`` alone (gcd(0, 0) = 0)."""
    _check_univariate(a, var)
    _check_univariate(b, var)
    while not b.is_zero():
        _, r = poly_div_rem(a, b, var)
        a, b = b, r
    if a.is_zero():
        return a
    return a / _leading(a, var)


def binomial(a: int, b: int) -> Fraction:
    """Binomial coefficient, zero outside ``0 <= b <= a``."""
    if a < 0:
        raise ValueError("binomial top index must be nonnegative")
    if b < 0 or b > a:
        return Fraction(0)
    return Fraction(math.comb(a, b))


def leading_in_eps(p: SparsePoly, var: str = EPS) -> Tuple[int, SparsePoly]:
    """Return ``(order, coefficient)`` of the lowest power of ``var`` in ``p``."""
    if p.is_zero():
        raise ZeroPolynomial("cannot take the leading term of the zero polynomial")
    groups = p.coefficients_in(var)
    order = min(groups)
    return order, groups[order]


class RationalFn:
    """Quotient of two polynomials in ``j``.

    The denominator involves ``j`` only; the numerator's coefficients may
    involve ``eps`` and free parameters. The stored form has no common factor
    in ``j`` and a monic denominator, so structural equality is value equality.
    """

    __slots__ = ("num", "den", "var")

    def __init__(self, num, den=1, var: str = J, *, reduce_terms: bool = True):
        num = as_poly(num)
        den = as_poly(den)
        if den.is_zero():
            raise ZeroDivisor("rational function with zero denominator")
        _check_univariate(den, var)
        self.var = var
        if num.is_zero():
            self.num, self.den = ZERO, ONE
            return
        if reduce_terms:
            g = den
            for c in _content_parts(num, var):
                if g.degree(var) == 0:
                    break
                g = poly_gcd(g, c, var)
            if g.degree(var) > 0:
                num, r1 = poly_div_rem(num, g, var)
                den, r2 = poly_div_rem(den, g, var)
                assert r1.is_zero() and r2.is_zero()
        lc = _leading(den, var)
        self.num = num / lc
        self.den = den / lc

    def __eq__(self, other) -> bool:
        if not isinstance(other, RationalFn):
            other = RationalFn(other)
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        return hash((self.num, self.den))

    def __add__(self, other) -> "RationalFn":
        if not isinstance(other, RationalFn):
            other = RationalFn(other, var=self.var)
        return RationalFn(self.num * other.den + other.num * self.den, self.den * other.den, self.var)

    __radd__ = __add__

    def __neg__(self):
        return RationalFn(-self.num, self.den, self.var)

    def __sub__(self, other):
        return self + (-other if isinstance(other, RationalFn) else RationalFn(-as_poly(other), var=self.var))

    def __mul__(self, other) -> "RationalFn":
        if not isinstance(other, RationalFn):
            other = RationalFn(other, var=self.var)
        return RationalFn(self.num * other.num, self.den * other.den, self.var)

    __rmul__ = __mul__

    def subs(self, values: Mapping[str, "SparsePoly | Scalar"]) -> "RationalFn":
        if self.var in values:
            raise ValueError("substitute into numerator and denominator separately to evaluate in j")
        return RationalFn(self.num.subs(values), self.den, self.var)

    def is_proper(self) -> bool:
        return self.num.degree(self.var) < self.den.degree(self.var)

    def to_json(self) -> dict:
        return {"num": self.num.to_json(), "den": self.den.to_json()}

    def __repr__(self):
        return f"RationalFn(({self.num}) / ({self.den}))"


def _content_parts(num: SparsePoly, var: str) -> Iterator[SparsePoly]:
    """Split ``num`` into polynomials in ``var`` alone whose gcd is its content."""
    by_rest: Dict[Monomial, Dict[Monomial, Fraction]] = {}
    for mono, c in num.items():
        jpart = tuple((v, e) for v, e in mono if v == var)
        rest = tuple((v, e) for v, e in mono if v != var)
        by_rest.setdefault(rest, {})[jpart] = c
    for terms in by_rest.values():
        yield SparsePoly(terms)


def sum_polys(polys: Iterable[SparsePoly]) -> SparsePoly:
    return reduce(lambda a, b: a + b, polys, ZERO)
