"""Large-twist expansion of the Mabuchi functional and f-stability verdicts.

For a fibration degeneration the quantity ``V(H+jL) M(P+jL)`` is a rational
function of ``j`` whose polynomial part is ``sum_i W_(n-i) j^i``. The levels
``W_0..W_n`` are read lexicographically: the first nonzero one decides.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .algebra import (
    EPS,
    J,
    ONE,
    ZERO,
    RationalFn,
    SparsePoly,
    as_poly,
    binomial,
    format_scalar,
    leading_in_eps,
    poly_div_rem,
)
from .errors import (
    DegreeOverflow,
    DimensionMismatch,
    MissingIntersectionNumber,
    PreconditionUnverifiable,
)
from .functionals import (
    central_fiber_excess,
    e_na,
    h_na,
    i_na,
    j_na,
    m_na,
    product,
    volume,
)
from .intersection import (
    Exceptional,
    FibrationDatum,
    IntersectionTable,
    TestConfigDatum,
    combo,
    combo_add,
    expand_twisted_power,
    intersect,
)


# ---------------------------------------------------------------- assembly


def mabuchi_rational_fn(datum: TestConfigDatum, *, df: bool = False) -> RationalFn:
    """``V(H+jL) M(P+jL)`` as a rational function of ``j``.

    With ``df=True`` the central-fiber excess is added, giving the same
    expansion for the Donaldson-Futaki invariant.
    """
    N = datum.dim
    fib = datum.fibration
    g = fib.volume_poly()
    f = fib.anticanonical_poly()
    if datum.canonical is None:
        raise MissingIntersectionNumber("canonical role (pullback of K_X + Delta) is not declared")
    P = expand_twisted_power(datum, datum.canonical, N)
    for ex in datum.exceptionals:
        weight = Fraction(ex.A)
        if df:
            weight += ex.b - 1
        if weight:
            P = P + weight * expand_twisted_power(datum, {ex.cls: ONE}, N)
    Q = expand_twisted_power(datum, None, N + 1)
    num = (N + 1) * g * P + N * f * Q
    den = (N + 1) * g
    return RationalFn(num, den)


@dataclass(frozen=True)
class WDecomposition:
    """``W_0..W_n`` (free of ``j``) plus the proper remainder ``W_(n+1)(j)``."""

    w: Tuple[SparsePoly, ...]
    remainder: RationalFn
    n: int

    @property
    def quotient(self) -> SparsePoly:
        x = SparsePoly.var(J)
        return sum((wk * x ** (self.n - k) for k, wk in enumerate(self.w)), ZERO)

    def recompose(self) -> RationalFn:
        return RationalFn(self.quotient * self.remainder.den + self.remainder.num, self.remainder.den)

    def subs(self, values: Mapping[str, object]) -> "WDecomposition":
        return WDecomposition(tuple(w.subs(values) for w in self.w), self.remainder.subs(values), self.n)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "w": [w.to_json() for w in self.w],
            "w_display": [str(w) for w in self.w],
            "remainder": self.remainder.to_json(),
            "remainder_display": {"num": str(self.remainder.num), "den": str(self.remainder.den)},
        }


def w_decompose(fn: RationalFn, n: int) -> WDecomposition:
    """Split ``fn`` into its polynomial part (levels ``W_0..W_n``) and a proper remainder."""
    q, r = poly_div_rem(fn.num, fn.den, fn.var)
    if not q.is_zero() and q.degree(fn.var) > n:
        raise DegreeOverflow(
            f"numerator degree {fn.num.degree(fn.var)} exceeds denominator degree "
            f"{fn.den.degree(fn.var)} + n = {fn.den.degree(fn.var) + n}"
        )
    w = tuple(q.coefficient(fn.var, n - k) for k in range(n + 1))
    return WDecomposition(w, RationalFn(r, fn.den, fn.var, reduce_terms=False), n)


def decompose(datum: TestConfigDatum, *, df: bool = False) -> WDecomposition:
    return w_decompose(mabuchi_rational_fn(datum, df=df), datum.n)


def decompose_deminormal(parts: Sequence[TestConfigDatum], *, df: bool = False) -> WDecomposition:
    """Sum of the expansions of the components of a deminormal total space."""
    if not parts:
        raise ValueError("need at least one component")
    ns = {p.n for p in parts}
    if len(ns) != 1:
        raise DimensionMismatch("components must share the base dimension")
    total = RationalFn(ZERO)
    for p in parts:
        total = total + mabuchi_rational_fn(p, df=df)
    return w_decompose(total, ns.pop())


# ---------------------------------------------------------------- verdicts


class VerdictKind(str, Enum):
    OBSTRUCTION_FOUND = "ObstructionFound"
    STRICTLY_POSITIVE_AT_LEVEL = "StrictlyPositiveAtLevel"
    ALL_TESTED_NONNEGATIVE = "AllTestedNonnegative"
    INDETERMINATE = "Indeterminate"


SIGN_WORDS = {1: "positive", -1: "negative", 0: "zero", None: "undetermined"}


@dataclass
class StabilityVerdict:
    kind: VerdictKind
    level: Optional[int]
    summary: str
    signs: List[Optional[int]] = field(default_factory=list)
    epsilon_analysis: List[str] = field(default_factory=list)
    nonnegative: Optional[bool] = None
    stable_compatible: Optional[bool] = None
    heuristic: bool = False
    leading_coefficient: Optional[SparsePoly] = None

    @property
    def label(self) -> str:
        return self.kind.value if self.level is None else f"{self.kind.value}({self.level})"

    def to_json(self) -> dict:
        out = {
            "kind": self.kind.value,
            "level": self.level,
            "label": self.label,
            "summary": self.summary,
            "signs": [SIGN_WORDS[s] for s in self.signs],
            "epsilon_analysis": list(self.epsilon_analysis),
            "nonnegative": self.nonnegative,
            "stable_compatible": self.stable_compatible,
        }
        if self.leading_coefficient is not None:
            out["leading_coefficient"] = str(self.leading_coefficient)
        if self.heuristic:
            out["heuristic"] = True
        return out


def parse_assumptions(items: Sequence[str]) -> Dict[str, str]:
    """Parse ``["t>0", "u=0"]`` into ``{"t": ">0", "u": "=0"}``."""
    out: Dict[str, str] = {}
    for raw in items:
        text = raw.replace(" ", "")
        for op in (">0", "<0", "=0"):
            if text.endswith(op) and text[: -len(op)].isidentifier():
                name = text[: -len(op)]
                if name in (J, EPS):
                    raise ValueError(f"cannot assume a sign for reserved variable {name!r}")
                out[name] = op
                break
        else:
            raise ValueError(f"assumption {raw!r} must look like 'name>0', 'name<0' or 'name=0'")
    return out


def zero_substitution(assume: Mapping[str, str]) -> Dict[str, int]:
    return {k: 0 for k, v in assume.items() if v == "=0"}


def _sign(x: Fraction) -> int:
    return (x > 0) - (x < 0)


def poly_sign(p: SparsePoly, assume: Mapping[str, str]) -> Optional[int]:
    """Sign of ``p`` for every admissible value of its variables, or ``None`` if it varies.

    A polynomial in free parameters has a definite sign only when every
    variable has a declared strict sign and all monomials then agree.
    """
    if p.is_zero():
        return 0
    signs = set()
    for mono, c in p.items():
        s = _sign(c)
        for var, e in mono:
            decl = assume.get(var)
            if decl == "<0":
                s *= (-1) ** e
            elif decl != ">0":
                return None
        signs.add(s)
    return signs.pop() if len(signs) == 1 else None


def level_sign(w: SparsePoly, assume: Mapping[str, str]) -> Tuple[Optional[int], str]:
    """Sign of one level for all sufficiently small ``eps > 0``, with a one-line explanation."""
    w = w.subs(zero_substitution(assume))
    if w.is_zero():
        return 0, "identically zero"
    if EPS in w.variables():
        order, coeff = leading_in_eps(w)
        s = poly_sign(coeff, assume)
        return s, f"leading term eps^{order} with coefficient {coeff} ({SIGN_WORDS[s]})"
    s = poly_sign(w, assume)
    return s, f"value {w} ({SIGN_WORDS[s]})"


def verdict(
    w: WDecomposition,
    assume: Optional[Mapping[str, str]] = None,
    *,
    declared_trivial: bool = False,
) -> StabilityVerdict:
    """Lexicographic reading of ``W_0..W_n``; the remainder is never consulted."""
    assume = dict(assume or {})
    signs: List[Optional[int]] = []
    analysis: List[str] = []
    zeros = zero_substitution(assume)
    for k, wk in enumerate(w.w):
        s, why = level_sign(wk, assume)
        signs.append(s)
        analysis.append(f"W_{k}: {why}")
        if s == 0:
            continue
        lead = wk.subs(zeros)
        if EPS in lead.variables():
            lead = leading_in_eps(lead)[1]
        if s is None:
            return StabilityVerdict(
                VerdictKind.INDETERMINATE, k,
                f"sign of W_{k} depends on free parameters without declared signs",
                signs, analysis, None, None, leading_coefficient=lead,
            )
        if s < 0:
            return StabilityVerdict(
                VerdictKind.OBSTRUCTION_FOUND, k,
                f"not f-semistable: W_0..W_{k - 1} vanish and W_{k} < 0" if k else "not f-semistable: W_0 < 0",
                signs, analysis, False, False, leading_coefficient=lead,
            )
        return StabilityVerdict(
            VerdictKind.STRICTLY_POSITIVE_AT_LEVEL, k,
            f"W_{k} > 0 is the first nonzero level; this degeneration does not destabilize",
            signs, analysis, True, True, leading_coefficient=lead,
        )
    if declared_trivial:
        return StabilityVerdict(
            VerdictKind.ALL_TESTED_NONNEGATIVE, None,
            "all levels vanish on a trivial degeneration",
            signs, analysis, True, True,
        )
    return StabilityVerdict(
        VerdictKind.ALL_TESTED_NONNEGATIVE, None,
        "not f-stable (all levels vanish on a nontrivial degeneration)",
        signs, analysis, True, False,
    )


def datum_verdict(datum: TestConfigDatum, assume: Optional[Mapping[str, str]] = None, *, df: bool = False) -> StabilityVerdict:
    return verdict(decompose(datum, df=df), assume, declared_trivial=datum.declared_trivial)


# ------------------------------------------------------- closed-form levels


def w0_fiber_check(datum: TestConfigDatum, fiber: TestConfigDatum) -> Tuple[bool, str]:
    """Compare ``W_0`` with ``C(N, n) (H^m . L^n) M(fiber)``."""
    if fiber.n != 0 or fiber.m != datum.m:
        raise DimensionMismatch("fiber datum must have base dimension 0 and the same relative dimension")
    w0 = decompose(datum).w[0]
    expected = binomial(datum.dim, datum.n) * datum.fibration.mixed_volume(datum.n) * m_na(fiber)
    if w0 == expected:
        return True, f"W_0 = {w0} matches the fiber formula"
    return False, f"W_0 = {w0} but the fiber formula gives {expected}"


def w1_curve_formula(datum: TestConfigDatum) -> SparsePoly:
    """``W_1`` over a curve: ``V (M + (S_b - S)(E - E_b))``."""
    if datum.n != 1:
        raise DimensionMismatch(f"curve formula needs base dimension 1, got {datum.n}")
    fib = datum.fibration
    m = datum.m
    V = fib.volume
    s_whole = fib.scalar_curvature("whole")
    s_fiber = fib.scalar_curvature("fiber")
    e_whole = e_na(datum)
    e_fiber = e_na(datum, cut=1)
    return V * (m_na(datum) + (s_fiber - s_whole) * (e_whole - e_fiber))


def w_k_via_fano_identity(
    datum: TestConfigDatum,
    k: int,
    lam,
    *,
    lower_j_vanish: Optional[bool] = None,
) -> SparsePoly:
    """``W_k = C(N, n-k) (H^(m+k) L^(n-k)) (H + lam (I - (k+1) J))`` on the ``(n-k)``-fold cut.

    Valid for normalized data with ``lam H = K + Delta`` modulo pullbacks from
    the base, once the J-functionals of the deeper cuts vanish. Pass
    ``lower_j_vanish=True`` to assert that; otherwise it is checked.
    """
    n, N = datum.n, datum.dim
    if not 0 <= k <= n:
        raise ValueError(f"level must lie in 0..{n}")
    if not datum.declared_normalized:
        raise PreconditionUnverifiable("the shortcut needs a datum declared normalized")
    lam = as_poly(lam)
    cut = n - k
    if not lower_j_vanish:
        try:
            for c in range(cut + 1, n + 1):
                if not j_na(datum, cut=c).is_zero():
                    raise PreconditionUnverifiable(f"J on the {c}-fold cut is nonzero")
            if n > 0 and datum.twist_combo():
                if not product(datum, (datum.polarization, N), (datum.twist_combo(), 1)).is_zero():
                    raise PreconditionUnverifiable("P^N . L does not vanish")
        except MissingIntersectionNumber as exc:
            raise PreconditionUnverifiable(
                f"cannot verify vanishing of the deeper cut J-functionals: {exc}"
            ) from exc
    inner = h_na(datum, cut=cut) + lam * (i_na(datum, cut=cut) - (k + 1) * j_na(datum, cut=cut))
    return binomial(N, cut) * volume(datum, cut) * inner


# --------------------------------------------------------------- builders


def _monomials(n_classes: int, degree: int):
    for combo_ in itertools.combinations_with_replacement(range(n_classes), degree):
        vec = [0] * n_classes
        for i in combo_:
            vec[i] += 1
        yield tuple(vec)


def product_datum(
    fiber: TestConfigDatum,
    n: int,
    base_degree,
    base_canonical=0,
    *,
    base_class: str = "L",
) -> TestConfigDatum:
    """Fiberwise product of a configuration of ``F`` with a base ``(B, L)``, ``L^n = base_degree``.

    ``X = F x B`` is polarized by ``H_F + L`` and ``K_B . L^(n-1) = base_canonical``.
    """
    if fiber.n != 0:
        raise DimensionMismatch("fiber datum must have base dimension 0")
    if base_class in fiber.table.classes:
        raise ValueError(f"class name {base_class!r} already used by the fiber")
    d = Fraction(base_degree)
    kb = Fraction(base_canonical)
    m = fiber.m
    N = n + m
    classes = fiber.table.classes + (base_class,)
    entries = {}
    for vec in _monomials(len(classes), N + 1):
        l_pow = vec[-1]
        if l_pow != n:
            entries[vec] = ZERO
            continue
        entries[vec] = d * fiber.table.value(vec[:-1])
    table = IntersectionTable(classes, N + 1, entries)
    L = {base_class: ONE}
    vF = fiber.fibration.volume
    kF = fiber.fibration.canonical_product(0)
    mv = tuple(binomial(m + i, i) * vF * d for i in range(n + 1))
    cp = []
    for b in range(min(n, N - 1) + 1):
        val = Fraction(0)
        if m >= 1:
            val += binomial(N - 1 - b, n - b) * kF * d
        if b <= n - 1 and n >= 1:
            val += binomial(N - 1 - b, n - 1 - b) * vF * kb
        cp.append(val)
    canonical = fiber.canonical or {}
    if n >= 1 and kb:
        canonical = combo_add(canonical, {base_class: as_poly(kb / d)})
    return TestConfigDatum(
        fibration=FibrationDatum(n, m, mv, tuple(cp)),
        table=table,
        polarization=combo_add(fiber.polarization, L),
        base_pullback=combo_add(fiber.base_pullback, L),
        twist=L,
        canonical=canonical,
        klog=None,
        exceptionals=fiber.exceptionals,
        variables=fiber.variables,
        declared_trivial=fiber.declared_trivial,
        declared_normalized=fiber.declared_normalized,
        name=f"{fiber.name or 'fiber'} x base(n={n})",
    )
