from __future__ import annotations

import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fibrk import gallery
from fibrk.algebra import EPS, ZERO, SparsePoly, parse_poly
from fibrk.degenerations import build_test_config, entropy_series, i_j_series
from fibrk.errors import DegenerateVolume
from fibrk.functionals import (
    central_fiber_excess,
    df_from_weights,
    df_intersection,
    e_na,
    functional_report,
    h_na,
    i_na,
    identity_checks,
    j_na,
    jcal_canonical,
    m_na,
    r_na,
    uniform_slack,
)
from fibrk.intersection import load_datum

from randdata import rand_cone, rand_test_config

eps = SparsePoly.var(EPS)
t, u = parse_poly("t"), parse_poly("u")


@pytest.fixture
def p1():
    return load_datum(gallery.get("p1-point"))


@pytest.fixture
def lcbase():
    return load_datum(gallery.get("lcbase"))


def test_trivial_configuration_is_all_zero():
    datum = load_datum(gallery.get("trivial"))
    report = functional_report(datum)
    assert all(v == ZERO for v in report.values().values())


def test_point_on_projective_line(p1):
    assert e_na(p1) == -eps ** 2 / 2
    assert i_na(p1) == eps ** 2
    assert j_na(p1) == eps ** 2 / 2
    assert h_na(p1) == eps
    assert r_na(p1) == ZERO
    assert jcal_canonical(p1) == -eps ** 2
    assert m_na(p1) == eps - eps ** 2
    assert df_intersection(p1) == m_na(p1)


def test_point_identities(p1):
    checks = dict(identity_checks(p1))
    assert all(checks.values())
    assert "H = (Klog - K) . P^N / V" in checks
    assert j_na(p1) == -e_na(p1)
    assert i_na(p1) == 2 * j_na(p1)


def test_uniform_slack_on_point(p1):
    slack = uniform_slack(p1, Fraction(1, 4))
    assert slack == (eps - eps ** 2) - Fraction(1, 4) * eps ** 2
    for k in range(1, 10):
        e = Fraction(k, 10)
        value = slack.subs({EPS: e}).constant_value()
        assert (value > 0) == (e < Fraction(4, 5))


def test_lcbase_functionals(lcbase):
    assert e_na(lcbase) == (-4 * eps ** 3 * t + eps ** 4 * u) / 4
    assert lcbase.fibration.volume * (i_na(lcbase) - 3 * j_na(lcbase)) == -eps ** 4 * u / 4
    assert h_na(lcbase) == ZERO
    assert j_na(lcbase) == -e_na(lcbase)


def test_cut_functionals_vanish_when_base_class_is_zero(lcbase):
    for c in (1, 2):
        assert e_na(lcbase, cut=c) == ZERO
        assert i_na(lcbase, cut=c) == ZERO
        assert j_na(lcbase, cut=c) == ZERO


@pytest.mark.parametrize(
    "args, expected",
    [
        ((1, 5, 0, 0), 0),
        ((1, 0, 0, 1), 2),
        ((2, 1, 4, 3), 1),
    ],
)
def test_df_from_weights(args, expected):
    assert df_from_weights(*args) == expected


def test_df_from_weights_with_log_terms():
    assert df_from_weights(2, 1, 4, 3, log_terms=(1, 2)) == 1
    assert df_from_weights(2, 1, 4, 3, log_terms=(0, 2)) == 2


def test_df_from_weights_needs_positive_a0():
    with pytest.raises(DegenerateVolume):
        df_from_weights(0, 1, 1, 1)


def test_reduced_central_fiber_gives_df_equal_m():
    rng = random.Random(5)
    for _ in range(10):
        datum = build_test_config(rand_cone(rng, 3, 1), lam=Fraction(-1))
        assert df_intersection(datum) == m_na(datum)


@given(st.integers(0, 10 ** 6))
@settings(max_examples=40, deadline=None)
def test_builder_data_are_normalized(seed):
    rng = random.Random(seed)
    N = rng.randint(1, 5)
    datum = build_test_config(rand_cone(rng, N, rng.randint(0, N)))
    assert j_na(datum) == -e_na(datum)


@given(st.integers(0, 10 ** 6), st.sampled_from([Fraction(1, 10), Fraction(1, 100), Fraction(1, 3)]))
@settings(max_examples=40, deadline=None)
def test_norm_inequalities_on_builder_data(seed, e):
    rng = random.Random(seed)
    N = rng.randint(1, 5)
    datum = build_test_config(rand_cone(rng, N, rng.randint(0, N), numeric_tails=True))
    i = i_na(datum).subs({EPS: e}).constant_value()
    j = j_na(datum).subs({EPS: e}).constant_value()
    assert j >= 0 and i >= 0
    assert j / N <= i - j <= N * j


@given(st.integers(0, 10 ** 6))
@settings(max_examples=30, deadline=None)
def test_builder_reproduces_series(seed):
    rng = random.Random(seed)
    N = rng.randint(1, 5)
    cone = rand_cone(rng, N, rng.randint(0, N), truncation=rng.randint(0, 6))
    datum = build_test_config(cone)
    assert (i_na(datum), j_na(datum)) == i_j_series(cone)
    assert h_na(datum) == entropy_series(cone)


@given(st.integers(0, 10 ** 6))
@settings(max_examples=30, deadline=None)
def test_excess_is_coefficientwise_nonnegative(seed):
    rng = random.Random(seed)
    N = rng.randint(1, 4)
    cone = rand_cone(rng, N, rng.randint(0, N), numeric_tails=True, multiplicity_b=True)
    datum = build_test_config(cone, lam=Fraction(rng.randint(-3, 3)))
    diff = df_intersection(datum) - m_na(datum)
    assert diff == central_fiber_excess(datum)
    assert all(c >= 0 for _, c in diff.items())


@given(st.integers(0, 10 ** 6))
@settings(max_examples=25, deadline=None)
def test_renaming_invariance(seed):
    rng = random.Random(seed)
    datum = rand_test_config(rng, rng.randint(0, 1), rng.randint(1, 2))
    renamed = datum.renamed({"H": "X1", "L": "X2", "E": "X3", "F": "X4"})
    assert functional_report(renamed).values() == functional_report(datum).values()


@given(st.integers(0, 10 ** 6))
@settings(max_examples=25, deadline=None)
def test_mabuchi_splits_into_entropy_ricci_and_energy(seed):
    rng = random.Random(seed)
    datum = rand_test_config(rng, rng.randint(0, 2), rng.randint(1, 2))
    s = datum.fibration.scalar_curvature("whole")
    assert m_na(datum) == h_na(datum) + r_na(datum) + s * e_na(datum)
