"""Non-Archimedean functionals of a compactified test configuration.

Notation: ``P`` is the compactified polarization, ``H`` the pullback of the
polarization of ``X``, ``L`` the pullback of the base polarization, ``K`` the
pullback of ``K_X + Delta`` and ``N = dim X``. All values are exact
polynomials in ``eps`` and the datum's free parameters.

Every functional accepts ``cut=c``: products are taken against ``L^c`` and
``X`` is replaced by a general complete intersection of ``c`` members of
``|L|`` (dimension ``N - c``, volume ``H^(N-c) . L^c``).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .algebra import ZERO, SparsePoly, as_poly, format_scalar
from .errors import DegenerateVolume, MissingIntersectionNumber
from .intersection import (
    Combo,
    TestConfigDatum,
    combo_add,
    combo_scale,
    intersect,
)


def _factors(datum: TestConfigDatum, factors, cut: int):
    out = [f for f in factors if f[1]]
    if cut:
        L = datum.twist_combo()
        if not L:
            return None
        out.append((L, cut))
    return out


def product(datum: TestConfigDatum, *factors: Tuple[Mapping[str, SparsePoly], int], cut: int = 0) -> SparsePoly:
    """``prod combo^power . L^cut`` on the total space."""
    fs = _factors(datum, factors, cut)
    if fs is None:
        return ZERO
    return intersect(datum.table, *fs)


def volume(datum: TestConfigDatum, cut: int = 0) -> Fraction:
    """``H^(N-cut) . L^cut`` on ``X``."""
    v = datum.fibration.mixed_volume(cut)
    if v <= 0:
        raise DegenerateVolume(f"volume H^{datum.dim - cut}*L^{cut} must be positive")
    return v


def _dim(datum: TestConfigDatum, cut: int) -> int:
    if cut < 0 or cut > datum.n:
        raise ValueError(f"cut must lie in 0..{datum.n}")
    return datum.dim - cut


def e_na(datum: TestConfigDatum, *, cut: int = 0) -> SparsePoly:
    """Monge-Ampere energy ``P^(N+1) / ((N+1) V)``."""
    d = _dim(datum, cut)
    return product(datum, (datum.polarization, d + 1), cut=cut) / ((d + 1) * volume(datum, cut))


def _pairing_with_base(datum: TestConfigDatum, cut: int) -> SparsePoly:
    d = _dim(datum, cut)
    return product(datum, (datum.polarization, 1), (datum.base_pullback, d), cut=cut)


def i_na(datum: TestConfigDatum, *, cut: int = 0) -> SparsePoly:
    d = _dim(datum, cut)
    diff = combo_add(datum.polarization, combo_scale(datum.base_pullback, -1))
    top = product(datum, (diff, 1), (datum.polarization, d), cut=cut)
    return (_pairing_with_base(datum, cut) - top) / volume(datum, cut)


def j_na(datum: TestConfigDatum, *, cut: int = 0) -> SparsePoly:
    return _pairing_with_base(datum, cut) / volume(datum, cut) - e_na(datum, cut=cut)


def energy_against(datum: TestConfigDatum, aux: Mapping[str, SparsePoly], *, cut: int = 0) -> SparsePoly:
    """``aux . P^(N) / V`` for a class ``aux`` pulled back from ``X``."""
    d = _dim(datum, cut)
    return product(datum, (aux, 1), (datum.polarization, d), cut=cut) / volume(datum, cut)


def jcal(datum: TestConfigDatum, aux: Mapping[str, SparsePoly], aux_slope: Fraction, *, cut: int = 0) -> SparsePoly:
    """Twisted energy ``aux . P^N / V - slope * E`` with ``slope = N (T . H^(N-1)) / H^N``."""
    return energy_against(datum, aux, cut=cut) - aux_slope * e_na(datum, cut=cut)


def canonical_combo(datum: TestConfigDatum) -> Combo:
    if datum.canonical is None:
        raise MissingIntersectionNumber("canonical role (pullback of K_X + Delta) is not declared")
    return datum.canonical


def canonical_slope(datum: TestConfigDatum) -> Fraction:
    """``N (K . H^(N-1)) / H^N``, i.e. minus the average scalar curvature."""
    return -datum.fibration.scalar_curvature("whole")


def r_na(datum: TestConfigDatum) -> SparsePoly:
    """Ricci energy ``K . P^N / V``."""
    return energy_against(datum, canonical_combo(datum))


def jcal_canonical(datum: TestConfigDatum) -> SparsePoly:
    return jcal(datum, canonical_combo(datum), canonical_slope(datum))


def exceptional_pairing(datum: TestConfigDatum, cls: str, *, cut: int = 0) -> SparsePoly:
    d = _dim(datum, cut)
    return product(datum, ({cls: SparsePoly.const(1)}, 1), (datum.polarization, d), cut=cut)


def h_na(datum: TestConfigDatum, *, cut: int = 0) -> SparsePoly:
    """Entropy ``sum_E A(v_E) (E . P^N) / V`` over the central fiber components."""
    total = ZERO
    for ex in datum.exceptionals:
        if ex.A:
            total = total + ex.A * exceptional_pairing(datum, ex.cls, cut=cut)
    return total / volume(datum, cut)


def m_na(datum: TestConfigDatum) -> SparsePoly:
    return h_na(datum) + jcal_canonical(datum)


def central_fiber_excess(datum: TestConfigDatum) -> SparsePoly:
    """``(X_0 - X_0,red) . P^N / V``; zero when the central fiber is reduced."""
    total = ZERO
    for ex in datum.exceptionals:
        if ex.b > 1:
            total = total + (ex.b - 1) * exceptional_pairing(datum, ex.cls)
    return total / volume(datum)


def df_intersection(datum: TestConfigDatum) -> SparsePoly:
    return m_na(datum) + central_fiber_excess(datum)


def df_from_weights(a0, a1, b0, b1, log_terms: Optional[Tuple[object, object]] = None) -> Fraction:
    """Donaldson-Futaki invariant from Hilbert and weight polynomial coefficients."""
    a0, a1, b0, b1 = (Fraction(x) for x in (a0, a1, b0, b1))
    if a0 <= 0:
        raise DegenerateVolume("leading Hilbert coefficient a0 must be positive")
    df = 2 * (b1 * a0 - a1 * b0) / a0 ** 2
    if log_terms is not None:
        ha0, hb0 = (Fraction(x) for x in log_terms)
        df += (hb0 * a0 - ha0 * b0) / a0 ** 2
    return df


def uniform_slack(datum: TestConfigDatum, delta) -> SparsePoly:
    """``M - delta * I``: nonnegative for every test configuration iff uniformly K-stable with slope delta."""
    return m_na(datum) - as_poly(delta) * i_na(datum)


@dataclass
class FunctionalReport:
    e_na: SparsePoly
    i_na: SparsePoly
    j_na: SparsePoly
    h_na: SparsePoly
    r_na: Optional[SparsePoly]
    m_na: Optional[SparsePoly]
    df: Optional[SparsePoly]
    volume: Fraction
    identities_checked: List[Tuple[str, bool]] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)

    def values(self) -> Dict[str, Optional[SparsePoly]]:
        return {
            "e_na": self.e_na,
            "i_na": self.i_na,
            "j_na": self.j_na,
            "h_na": self.h_na,
            "r_na": self.r_na,
            "m_na": self.m_na,
            "df": self.df,
        }

    def to_json(self, *, check: bool = False) -> dict:
        out = {
            "volume": format_scalar(self.volume),
            "values": {k: (None if v is None else v.to_json()) for k, v in self.values().items()},
            "display": {k: (None if v is None else str(v)) for k, v in self.values().items()},
        }
        if check:
            out["identities_checked"] = [{"name": n, "holds": h} for n, h in self.identities_checked]
        if self.notes:
            out["notes"] = list(self.notes)
        return out


def identity_checks(datum: TestConfigDatum) -> List[Tuple[str, bool]]:
    """Exact identities that hold for every well-formed datum, evaluated on this one."""
    out: List[Tuple[str, bool]] = []
    e, i, j = e_na(datum), i_na(datum), j_na(datum)
    if datum.declared_normalized:
        out.append(("normalized: J = -E", j == -e))
    if datum.declared_trivial:
        out.append(("trivial: E = I = J = 0", e.is_zero() and i.is_zero() and j.is_zero()))
    if datum.canonical is not None:
        try:
            r = r_na(datum)
            m = m_na(datum)
            s = datum.fibration.scalar_curvature("whole")
            out.append(("M = H + R + S E", m == h_na(datum) + r + s * e))
        except MissingIntersectionNumber:
            pass
    if datum.klog is not None and datum.canonical is not None:
        diff = combo_add(datum.klog, combo_scale(datum.canonical, -1))
        try:
            out.append(("H = (Klog - K) . P^N / V", h_na(datum) == energy_against(datum, diff)))
        except MissingIntersectionNumber:
            pass
    if all(ex.b == 1 for ex in datum.exceptionals):
        out.append(("reduced central fiber: DF = M", central_fiber_excess(datum).is_zero()))
    return out


def functional_report(datum: TestConfigDatum, *, check: bool = False) -> FunctionalReport:
    notes: List[str] = []
    r = m = df = None
    if datum.canonical is not None:
        r, m = r_na(datum), m_na(datum)
        df = m + central_fiber_excess(datum)
    else:
        notes.append("no canonical role: R, M and DF not computed")
    report = FunctionalReport(
        e_na=e_na(datum),
        i_na=i_na(datum),
        j_na=j_na(datum),
        h_na=h_na(datum),
        r_na=r,
        m_na=m,
        df=df,
        volume=volume(datum),
        notes=notes,
    )
    if check:
        report.identities_checked = identity_checks(datum)
    return report
