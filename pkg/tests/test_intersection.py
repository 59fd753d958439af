from __future__ import annotations

import itertools
import json
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fibrk import gallery
from fibrk.algebra import EPS, J, ONE, ZERO, SparsePoly, parse_poly
from fibrk.errors import DegreeMismatch, IdentityViolation, MissingIntersectionNumber, SchemaError
from fibrk.functionals import functional_report
from fibrk.intersection import (
    FibrationDatum,
    IntersectionTable,
    TestConfigDatum,
    check_normalized,
    datum_diagnostics,
    datum_to_json,
    eval_product,
    expand_twisted_power,
    load_datum,
    scalar_curvature,
)

from randdata import monomials, rand_frac, rand_test_config

eps = SparsePoly.var(EPS)


def lcbase_table(u=None):
    products = {"E^3*H": parse_poly("t"), "E^4": parse_poly("u") if u is None else u}
    zeros = [{"L": 1}, {"H": 4}, {"H": 3, "E": 1}, {"H": 2, "E": 2}]
    return IntersectionTable.from_products(["H", "L", "E"], 4, products, zeros)


# ---------------------------------------------------------------- lookups


def test_lookup_stored_and_defaulted():
    table = lcbase_table(u=ZERO)
    assert eval_product(table, {"E": 4}) == ZERO
    assert eval_product(table, {"E": 3, "H": 1}) == parse_poly("t")
    assert eval_product(table, {"H": 2, "E": 2}) == ZERO
    assert eval_product(table, {"L": 2, "E": 2}) == ZERO


def test_lookup_wrong_degree():
    with pytest.raises(DegreeMismatch):
        eval_product(lcbase_table(), {"E": 3})


def test_missing_monomial_is_named():
    table = IntersectionTable.from_products(["A", "B"], 2, {"A^2": 1})
    with pytest.raises(MissingIntersectionNumber) as info:
        eval_product(table, {"A": 1, "B": 1})
    assert info.value.monomial == "A*B"


def test_zero_default_uses_divisibility():
    table = IntersectionTable.from_products(["A", "B"], 3, {}, [{"B": 2}])
    assert eval_product(table, {"A": 1, "B": 2}) == ZERO
    assert eval_product(table, {"B": 3}) == ZERO
    with pytest.raises(MissingIntersectionNumber):
        eval_product(table, {"A": 2, "B": 1})


def test_table_rejects_entry_of_wrong_degree():
    with pytest.raises(DegreeMismatch):
        IntersectionTable(("A",), 2, {(3,): ONE})


# ---------------------------------------------------------------- twisted powers


def _brute_force(datum: TestConfigDatum, aux, total: int) -> SparsePoly:
    """Expand (P + jL)^total . aux by enumerating every ordered choice of terms."""
    j = SparsePoly.var(J)
    terms = list(datum.polarization.items()) + [(k, v * j) for k, v in datum.twist.items()]
    classes = datum.table.classes
    out = ZERO
    for pick in itertools.product(terms, repeat=total):
        coeff = ONE
        vec = [0] * len(classes)
        for name, c in pick:
            coeff = coeff * c
            vec[classes.index(name)] += 1
        if aux is not None:
            for name, c in aux.items():
                v2 = list(vec)
                v2[classes.index(name)] += 1
                out = out + coeff * c * datum.table.value(tuple(v2))
        else:
            out = out + coeff * datum.table.value(tuple(vec))
    return out


@pytest.mark.parametrize("seed", range(12))
def test_twisted_power_matches_brute_force(seed):
    rng = random.Random(seed)
    n = rng.randint(0, 2)
    m = rng.randint(1, 4 - n) if n < 4 else 0
    datum = rand_test_config(rng, n, m)
    N = datum.dim
    assert N + 1 <= 5
    assert expand_twisted_power(datum, None, N + 1) == _brute_force(datum, None, N + 1)
    aux = datum.canonical
    assert expand_twisted_power(datum, aux, N) == _brute_force(datum, aux, N)


def test_lcbase_top_power():
    datum = load_datum(gallery.get("lcbase"))
    p = expand_twisted_power(datum, None, 4)
    assert p.coefficient(J, 0) == -4 * eps ** 3 * parse_poly("t") + eps ** 4 * parse_poly("u")


def test_degree_one_on_product_datum():
    # (H + jL) . aux on a product whose only nonzero products are H.L and L^2 = 0
    table = IntersectionTable.from_products(["H", "L"], 2, {"H*L": 3, "H^2": 0, "L^2": 0})
    datum = TestConfigDatum(
        fibration=FibrationDatum(0, 1, (Fraction(3),), (Fraction(-2),)),
        table=table,
        polarization={"H": ONE},
        base_pullback={"H": ONE},
        twist={"L": ONE},
    )
    assert expand_twisted_power(datum, {"H": ONE}, 1) == 3 * SparsePoly.var(J)


# ---------------------------------------------------------------- fibration data


def test_scalar_curvature_examples():
    p1 = FibrationDatum(0, 1, (Fraction(1),), (Fraction(-2),))
    assert scalar_curvature(p1) == 2
    assert scalar_curvature(FibrationDatum(1, 2, (Fraction(2), Fraction(5)), (Fraction(0), Fraction(0)))) == 0


def test_fano_fiber_scalar_curvature():
    lam, m = Fraction(3, 2), 2
    vF = Fraction(4)
    # K.H^(m-1).L^n = lam H^m.L^n
    fib = FibrationDatum(1, m, (vF, Fraction(7)), (Fraction(5), lam * vF))
    assert scalar_curvature(fib, "fiber") == -m * lam


@given(
    st.lists(st.fractions(1, 20, max_denominator=6), min_size=3, max_size=3),
    st.lists(st.fractions(-20, 20, max_denominator=6), min_size=3, max_size=3),
    st.fractions(1, 30, max_denominator=7),
)
def test_scalar_curvature_is_scale_invariant(mv, cp, k):
    fib = FibrationDatum(2, 1, tuple(mv), tuple(cp))
    scaled = FibrationDatum(2, 1, tuple(k * v for v in mv), tuple(k * v for v in cp))
    for which in ("whole", "fiber"):
        assert scalar_curvature(fib, which) == scalar_curvature(scaled, which)


@given(
    st.lists(st.fractions(1, 9, max_denominator=4), min_size=3, max_size=3),
    st.lists(st.fractions(-9, 9, max_denominator=4), min_size=3, max_size=3),
    st.fractions(0, 5, max_denominator=3),
)
@settings(max_examples=40)
def test_twisted_fibration_shifts_polynomials(mv, cp, c):
    fib = FibrationDatum(2, 2, tuple(mv), tuple(cp))
    tw = fib.twisted(c)
    assert tw.volume_poly() == fib.volume_poly().shift(J, c)
    assert tw.anticanonical_poly() == fib.anticanonical_poly().shift(J, c)


def test_degenerate_volume_rejected():
    from fibrk.errors import DegenerateVolume

    with pytest.raises(DegenerateVolume):
        FibrationDatum(0, 1, (Fraction(0),))


# ---------------------------------------------------------------- loading


@pytest.mark.parametrize("name", ["lcbase", "p1-point", "trivial"])
def test_bundled_data_validate_cleanly(name):
    assert datum_diagnostics(gallery.get(name)) == []


def test_diagnostic_for_wrong_degree_names_monomial():
    raw = gallery.get("lcbase")
    raw["products"].append({"exponents": {"E": 2, "H": 1}, "value": "1"})
    diags = datum_diagnostics(raw)
    assert len(diags) == 1
    pointer, message = diags[0]
    assert pointer == "/products/2/exponents"
    assert "H*E^2" in message


def test_diagnostic_for_undeclared_variable():
    raw = gallery.get("lcbase")
    raw["products"][0]["value"] = "t + w"
    diags = datum_diagnostics(raw)
    assert diags == [("/products/0/value", "undeclared variable(s) w")]


def test_load_raises_schema_error_with_pointer():
    raw = gallery.get("p1-point")
    raw["exceptionals"][0]["b"] = 0
    with pytest.raises(SchemaError) as info:
        load_datum(raw)
    assert info.value.pointer == "/exceptionals/0/b"


def test_diagnostics_collect_several_problems():
    raw = gallery.get("p1-point")
    raw["roles"]["polarization"] = "Q"
    raw["fibration"]["mixed_volumes"] = ["0"]
    raw["extra"] = 1
    pointers = [p for p, _ in datum_diagnostics(raw)]
    assert pointers == ["/extra", "/roles/polarization", "/fibration/mixed_volumes/0"]


def test_non_object_datum():
    assert datum_diagnostics([1, 2]) == [("/", "datum must be a JSON object")]


@pytest.mark.parametrize("name", ["lcbase", "p1-point", "trivial"])
def test_json_round_trip(name):
    datum = load_datum(gallery.get(name))
    again = load_datum(json.loads(json.dumps(datum_to_json(datum))))
    assert functional_report(again).values() == functional_report(datum).values()


def test_renaming_classes_changes_nothing():
    datum = load_datum(gallery.get("p1-point"))
    renamed = datum.renamed({"H": "Hbar", "E": "E1", "K": "Kx"})
    assert functional_report(renamed).values() == functional_report(datum).values()


def test_declared_normalization_is_checked():
    raw = gallery.get("p1-point")
    raw["products"][1]["value"] = "1"  # H.E = 1 breaks P . H = 0
    datum = load_datum(raw)
    with pytest.raises(IdentityViolation):
        check_normalized(datum)
    check_normalized(load_datum(gallery.get("p1-point")))
