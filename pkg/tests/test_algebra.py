from __future__ import annotations

import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fibrk.algebra import (
    EPS,
    ONE,
    ZERO,
    RationalFn,
    SparsePoly,
    binomial,
    leading_in_eps,
    parse_poly,
    poly_div_rem,
    poly_gcd,
    scalar,
)
from fibrk.errors import (
    MixedVariableDivision,
    SchemaError,
    UndeclaredVariable,
    ZeroDivisor,
    ZeroPolynomial,
)

VARS = ["j", "eps", "t", "u"]

fractions = st.fractions(min_value=-20, max_value=20, max_denominator=12)


@st.composite
def polys(draw, variables=VARS, max_terms=5, max_exp=3):
    terms = {}
    for _ in range(draw(st.integers(0, max_terms))):
        exps = {v: draw(st.integers(0, max_exp)) for v in draw(st.sets(st.sampled_from(variables), max_size=3))}
        p = SparsePoly.monomial(exps, draw(fractions))
        for mono, c in p.items():
            terms[mono] = terms.get(mono, 0) + c
    return SparsePoly(terms)


# ---------------------------------------------------------------- ring axioms


@given(polys(), polys(), polys())
def test_ring_axioms(a, b, c):
    assert a + b == b + a
    assert a * b == b * a
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a - a == ZERO
    assert a * ONE == a


@given(polys(), st.integers(0, 3))
def test_power_matches_repeated_product(a, k):
    expected = ONE
    for _ in range(k):
        expected = expected * a
    assert a ** k == expected


def test_zero_coefficients_are_dropped():
    p = SparsePoly.var("t") - SparsePoly.var("t")
    assert p.is_zero()
    assert p.terms == {}


@given(polys(["eps", "t"]), fractions)
def test_subs_is_a_ring_map(a, x):
    b = a * a + a
    assert b.subs({"t": x}) == a.subs({"t": x}) * a.subs({"t": x}) + a.subs({"t": x})


# ---------------------------------------------------------------- parsing and JSON


@pytest.mark.parametrize(
    "text, expected",
    [
        ("3*t*eps^2 - 1/2*u", 3 * SparsePoly.var("t") * SparsePoly.var("eps", 2) - Fraction(1, 2) * SparsePoly.var("u")),
        ("(eps + 1)**2", SparsePoly.var("eps", 2) + 2 * SparsePoly.var("eps") + 1),
        ("-4", SparsePoly.const(-4)),
        ("t/3", SparsePoly.var("t") / 3),
    ],
)
def test_parse(text, expected):
    assert parse_poly(text) == expected


@pytest.mark.parametrize("text", ["", "3 +", "t^x", "(t", "t $ u"])
def test_parse_rejects_garbage(text):
    with pytest.raises(ValueError):
        parse_poly(text)


@given(polys())
def test_json_round_trip(p):
    assert SparsePoly.from_json(p.to_json()) == p
    assert parse_poly(str(p)) == p


def test_from_json_rejects_undeclared_variable():
    with pytest.raises(UndeclaredVariable) as info:
        SparsePoly.from_json("t + w", declared={"t"}, pointer="/products/0/value")
    assert info.value.pointer == "/products/0/value"
    assert "w" in info.value.detail


def test_from_json_rejects_bad_shape():
    with pytest.raises(SchemaError):
        SparsePoly.from_json({"coeff": 1})
    with pytest.raises(SchemaError):
        SparsePoly.from_json([{"exponents": {"t": 1}}])


def test_scalar_literals():
    assert scalar("-3/4") == Fraction(-3, 4)
    assert scalar(5) == 5
    with pytest.raises(ValueError):
        scalar("0.5")
    with pytest.raises(TypeError):
        scalar(True)


# ---------------------------------------------------------------- binomials


@given(st.integers(1, 40), st.integers(1, 42))
def test_pascal_rule(a, b):
    assert binomial(a, b) == binomial(a - 1, b - 1) + binomial(a - 1, b)


def test_binomial_edges():
    assert binomial(5, 0) == binomial(5, 5) == 1
    assert binomial(5, -1) == binomial(5, 6) == 0


@given(st.integers(0, 30), st.integers(0, 30))
def test_hockey_stick(r, extra):
    N = r + extra
    assert sum(binomial(i, r) for i in range(r, N + 1)) == binomial(N + 1, r + 1)


def test_binomial_collapse_example():
    # C(4,2) - C(4,1) = 6 - 4
    assert binomial(4, 2) - binomial(4, 1) == 2


# ---------------------------------------------------------------- division


def test_long_division_example():
    j = SparsePoly.var("j")
    q, r = poly_div_rem(j ** 3 + 2 * j, j ** 2 + 1)
    assert q == j
    assert r == j


def test_division_errors():
    j = SparsePoly.var("j")
    with pytest.raises(ZeroDivisor):
        poly_div_rem(j, ZERO)
    with pytest.raises(MixedVariableDivision):
        poly_div_rem(j, j + SparsePoly.var("t"))


def test_random_division_round_trips():
    rng = random.Random(20240611)
    for _ in range(200):
        dd = rng.randint(0, 4)
        den = SparsePoly({(("j", e),) if e else (): Fraction(rng.randint(-6, 6), rng.randint(1, 5)) for e in range(dd)})
        den = den + Fraction(rng.choice([-3, -1, 1, 2]), rng.randint(1, 3)) * SparsePoly.var("j", dd)
        num = ZERO
        for e in range(rng.randint(0, 7)):
            coeff = Fraction(rng.randint(-9, 9), rng.randint(1, 7)) + rng.randint(-2, 2) * SparsePoly.var("eps")
            num = num + coeff * SparsePoly.var("j", e)
        q, r = poly_div_rem(num, den)
        assert q * den + r == num
        assert r.is_zero() or r.degree("j") < den.degree("j")


@given(polys(["j"]), polys(["j"]))
@settings(max_examples=60)
def test_gcd_divides_both(a, b):
    g = poly_gcd(a, b)
    if g.is_zero():
        assert a.is_zero() and b.is_zero()
        return
    assert poly_div_rem(a, g)[1].is_zero()
    assert poly_div_rem(b, g)[1].is_zero()


# ---------------------------------------------------------------- leading terms


def test_leading_in_eps_example():
    eps, t, u = (SparsePoly.var(v) for v in ("eps", "t", "u"))
    order, coeff = leading_in_eps(3 * eps ** 2 * t - eps ** 3 * u)
    assert order == 2
    assert coeff == 3 * t


def test_leading_in_eps_of_zero():
    with pytest.raises(ZeroPolynomial):
        leading_in_eps(ZERO)


@given(polys(["eps", "t"]))
def test_leading_in_eps_matches_scan(p):
    if p.is_zero():
        return
    order, coeff = leading_in_eps(p)
    for k in range(order):
        assert p.coefficient(EPS, k).is_zero()
    assert coeff == p.coefficient(EPS, order)
    assert not coeff.is_zero()


# ---------------------------------------------------------------- rational functions


def test_rational_function_reduces_common_factor():
    j, t = SparsePoly.var("j"), SparsePoly.var("t")
    fn = RationalFn((j + 1) * (j + 2) * t, 2 * (j + 1))
    assert fn.den == ONE
    assert fn.num == (j + 2) * t / 2


@given(polys(["j", "t"]), polys(["j"]), polys(["j", "t"]), polys(["j"]))
@settings(max_examples=60)
def test_rational_function_arithmetic(n1, d1, n2, d2):
    if d1.is_zero() or d2.is_zero():
        return
    a, b = RationalFn(n1, d1), RationalFn(n2, d2)
    total = a + b
    # cross-multiplied identity
    assert total.num * d1 * d2 == (n1 * d2 + n2 * d1) * total.den
    prod = a * b
    assert prod.num * d1 * d2 == n1 * n2 * prod.den


def test_rational_function_equality_is_value_equality():
    j = SparsePoly.var("j")
    assert RationalFn(2 * j + 2, 4 * j ** 2 - 4) == RationalFn(SparsePoly.const(Fraction(1, 2)), j - 1)
