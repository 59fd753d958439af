"""Deformation to the normal cone: epsilon expansions and obstruction verdicts.

A :class:`NormalConeDatum` describes the exceptional data of the blow-up of
``Z x {0}`` (scaled by ``eps``) through per-component numbers. Write
``c(s, a) = (-1)^a E_s . E^a . H^(N-a)``; it vanishes for ``a`` below the
codimension of the center, equals ``deg * center`` at the codimension and is
an unknown tail beyond it. Unknown tails are carried as symbols
``tau_<s>_<a>`` unless numeric values are supplied.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .algebra import EPS, ONE, ZERO, SparsePoly, binomial, format_scalar, leading_in_eps, scalar
from .errors import (
    IndexOutOfRange,
    InsufficientComponents,
    PreconditionUnverifiable,
    SchemaError,
)
from .intersection import (
    Exceptional,
    FibrationDatum,
    IntersectionTable,
    TestConfigDatum,
)
from .winvariants import SIGN_WORDS, StabilityVerdict, VerdictKind, _sign

DEFAULT_TRUNCATION = 4


@dataclass(frozen=True)
class ConeComponent:
    """One Rees component ``E_s``.

    ``deg`` is the degree of the generic fiber of ``E_s`` over the center and
    ``center`` is ``Z . H^(N - codim)``. ``b`` is the multiplicity of ``E_s`` in
    the central fiber. ``tails`` optionally fixes ``c(s, a)`` for ``a > codim``.
    """

    codim: int
    m: int
    deg: Fraction
    center: Fraction
    A: Fraction = Fraction(0)
    fiber_type: bool = False
    b: int = 1
    tails: Mapping[int, Fraction] = field(default_factory=dict)

    def __post_init__(self):
        if self.codim < 0:
            raise ValueError("codimension must be nonnegative")
        if self.m < 1 or self.b < 1:
            raise ValueError("multiplicities must be positive integers")
        if self.deg <= 0 or self.center <= 0:
            raise ValueError("deg and center must be positive")


@dataclass(frozen=True)
class NormalConeDatum:
    N: int
    n: int
    V: Fraction
    components: Tuple[ConeComponent, ...] = ()
    truncation: int = DEFAULT_TRUNCATION

    def __post_init__(self):
        if self.N < 1 or not 0 <= self.n <= self.N:
            raise ValueError("need N >= 1 and 0 <= n <= N")
        if self.V <= 0:
            raise ValueError("volume must be positive")
        for c in self.components:
            if not 1 <= c.codim <= self.N:
                raise ValueError(f"codimension {c.codim} outside 1..{self.N}")

    @property
    def r(self) -> Optional[int]:
        """Minimal codimension of the centers (``None`` when there are none)."""
        return min((c.codim for c in self.components), default=None)


def tail_symbol(s: int, a: int) -> str:
    return f"tau_{s}_{a}"


def _kept(comp: ConeComponent, a: int, truncation: int) -> bool:
    return a == comp.codim or comp.codim < a <= truncation


def c_value(comp: ConeComponent, s: int, a: int, truncation: int = DEFAULT_TRUNCATION) -> SparsePoly:
    """``c(s, a)``; zero below the codimension and past the truncation order."""
    if a < comp.codim or not _kept(comp, a, truncation):
        return ZERO
    if a == comp.codim:
        return SparsePoly.const(comp.deg * comp.center)
    if a in comp.tails:
        return SparsePoly.const(comp.tails[a])
    return SparsePoly.var(tail_symbol(s, a))


def a_coefficient(
    components: Sequence[ConeComponent],
    N: int,
    i: int,
    j: int,
    truncation: int = DEFAULT_TRUNCATION,
) -> SparsePoly:
    """``a_i^(j) = sum_{codim s = j} m_s sum_{a=j}^{i} C(i, a) eps^a c(s, a)``."""
    if not (0 <= i <= N and 0 <= j <= N):
        raise IndexOutOfRange(f"need 0 <= i, j <= {N}, got i={i}, j={j}")
    if i < j:
        return ZERO
    eps = SparsePoly.var(EPS)
    total = ZERO
    for s, comp in enumerate(components):
        if comp.codim != j:
            continue
        for a in range(j, i + 1):
            c = c_value(comp, s, a, truncation)
            if not c.is_zero():
                total = total + comp.m * binomial(i, a) * eps ** a * c
    return total


def a_series(datum: NormalConeDatum, i: int, j: int) -> SparsePoly:
    return a_coefficient(datum.components, datum.N, i, j, datum.truncation)


def i_j_series(datum: NormalConeDatum) -> Tuple[SparsePoly, SparsePoly]:
    """``(I, J)`` from ``V I = eps sum_j a_N^(j)`` and ``V J = eps/(N+1) sum_j sum_i a_i^(j)``."""
    N = datum.N
    eps = SparsePoly.var(EPS)
    vi = ZERO
    vj = ZERO
    for j in range(1, N + 1):
        vi = vi + a_series(datum, N, j)
        for i in range(j, N + 1):
            vj = vj + a_series(datum, i, j)
    return eps * vi / datum.V, eps * vj / ((N + 1) * datum.V)


def fano_leading(datum: NormalConeDatum, n: Optional[int] = None) -> Tuple[Optional[int], Fraction]:
    """Order ``r + 1`` and leading coefficient of ``V (I - (n+1) J)``."""
    n = datum.n if n is None else n
    r = datum.r
    if r is None:
        return None, Fraction(0)
    coeff = Fraction(0)
    for comp in datum.components:
        if comp.codim == r:
            coeff += comp.m * comp.deg * comp.center * binomial(datum.N, r) * (1 - Fraction(n + 1, r + 1))
    return r + 1, coeff


def entropy_series(datum: NormalConeDatum) -> SparsePoly:
    """``H = sum_s A_s m_s sum_a C(N, a) eps^a c(s, a) / V``."""
    eps = SparsePoly.var(EPS)
    total = ZERO
    for s, comp in enumerate(datum.components):
        if not comp.A:
            continue
        for a in range(comp.codim, datum.N + 1):
            c = c_value(comp, s, a, datum.truncation)
            if not c.is_zero():
                total = total + comp.A * comp.m * binomial(datum.N, a) * eps ** a * c
    return total / datum.V


def lc_obstruction(datum: NormalConeDatum, k: Optional[int] = None) -> StabilityVerdict:
    """Negative discrepancies at the minimal codimension force ``W_k < 0``.

    ``k`` is the first level at which the cut configuration is nontrivial; it
    depends on a genericity choice and must be supplied.
    """
    if not datum.components:
        return StabilityVerdict(
            VerdictKind.ALL_TESTED_NONNEGATIVE, None,
            "trivial degeneration (no centers)", [], [], True, True,
        )
    if k is None:
        raise PreconditionUnverifiable("the level k of the first nontrivial cut must be supplied")
    if not 0 <= k <= datum.n:
        raise IndexOutOfRange(f"level must lie in 0..{datum.n}")
    r = datum.r
    h = entropy_series(datum)
    if h.is_zero():
        return StabilityVerdict(
            VerdictKind.INDETERMINATE, k,
            "entropy vanishes at every tracked order; no obstruction claimed",
            [None], ["H: identically zero at tracked orders"],
        )
    order, coeff = leading_in_eps(h)
    line = f"H: leading term eps^{order} with coefficient {coeff}"
    if order == r and coeff.is_constant():
        s = _sign(coeff.constant_value())
        lead = coeff * datum.V
        note = f"R and E are O(eps^{r + 1}); W_{k} has the sign of the entropy at order eps^{r}"
        if s < 0:
            return StabilityVerdict(
                VerdictKind.OBSTRUCTION_FOUND, k,
                f"not f-semistable: negative discrepancy at codimension {r} forces W_{k} < 0",
                [s], [line, note], False, False, leading_coefficient=lead,
            )
        if s > 0:
            return StabilityVerdict(
                VerdictKind.STRICTLY_POSITIVE_AT_LEVEL, k,
                f"entropy dominates with positive sign; no obstruction at level {k}",
                [s], [line, note], True, True, leading_coefficient=lead,
            )
    return StabilityVerdict(
        VerdictKind.INDETERMINATE, k,
        "entropy does not dominate at the minimal codimension; no obstruction claimed",
        [None], [line],
    )


def fano_fiber_type_obstruction(datum: NormalConeDatum, n: Optional[int], lam) -> StabilityVerdict:
    """For ``-(K + Delta) = lam H`` relatively, a non-fiber-type lc center of codim ``r > n`` gives ``W_n < 0``."""
    n = datum.n if n is None else n
    lam = Fraction(lam)
    if lam <= 0:
        raise ValueError("lambda must be positive")
    if any(c.A != 0 for c in datum.components):
        raise PreconditionUnverifiable("every component must have discrepancy A = 0 (lc centers)")
    r = datum.r
    if r is None:
        return StabilityVerdict(
            VerdictKind.ALL_TESTED_NONNEGATIVE, None, "trivial degeneration (no centers)", [], [], True, True,
        )
    minimal = [c for c in datum.components if c.codim == r]
    order, coeff = fano_leading(datum, n)
    line = f"V(I - {n + 1}J): leading term eps^{order} with coefficient {format_scalar(coeff)}"
    if r > n and not any(c.fiber_type for c in minimal):
        lead = -lam * coeff
        return StabilityVerdict(
            VerdictKind.OBSTRUCTION_FOUND, n,
            f"not f-semistable: non-fiber-type lc center of codimension {r} > {n} gives W_{n} < 0",
            [-1], [line, f"W_{n} = -lambda V(I - {n + 1}J) + O(eps^{order + 1}), leading coefficient {format_scalar(lead)}"],
            False, False, leading_coefficient=SparsePoly.const(lead),
        )
    why = "a minimal-codimension center is of fiber type" if r > n else f"r = {r} <= n = {n}"
    return StabilityVerdict(
        VerdictKind.INDETERMINATE, n, f"hypotheses fail ({why}); no obstruction claimed", [None], [line],
    )


@dataclass(frozen=True)
class ComponentScalarData:
    """Per irreducible component of a deminormal fibration."""

    S: Fraction
    base_volume: Fraction
    fiber_volume: Fraction

    def __post_init__(self):
        if self.base_volume <= 0 or self.fiber_volume <= 0:
            raise ValueError("volumes must be positive")


@dataclass(frozen=True)
class SameScalarResult:
    equal: bool
    w0_leading_sign: Optional[int]
    coefficient: Optional[Fraction]

    def to_json(self) -> dict:
        return {
            "equal": self.equal,
            "w0_leading_sign": None if self.w0_leading_sign is None else SIGN_WORDS[self.w0_leading_sign],
            "coefficient": None if self.coefficient is None else format_scalar(self.coefficient),
        }


def same_scalar_check(components: Sequence[ComponentScalarData]) -> SameScalarResult:
    """Unequal fiber scalar curvatures destabilize at level 0.

    The coefficient of ``eps * eta`` in ``W_0`` is
    ``(H|)^m (sum_k (L|B_k)^n S_k - L^n S_max)``, with the fiber volume of a
    component attaining ``S_max``.
    """
    if len(components) < 2:
        raise InsufficientComponents("need at least two components")
    values = {c.S for c in components}
    if len(values) == 1:
        return SameScalarResult(True, None, None)
    s_max = max(values)
    top = next(c for c in components if c.S == s_max)
    total_base = sum((c.base_volume for c in components), Fraction(0))
    weighted = sum((c.base_volume * c.S for c in components), Fraction(0))
    coeff = top.fiber_volume * (weighted - total_base * s_max)
    return SameScalarResult(False, _sign(coeff), coeff)


# ---------------------------------------------------------------- builder


def build_test_config(datum: NormalConeDatum, *, lam=None, name: str = "") -> TestConfigDatum:
    """Intersection-table realization of the normal-cone data.

    Classes are ``H`` and one class ``E<s>`` per component standing for
    ``m_s E_s``; distinct components are disjoint. The polarization is
    ``H - eps sum_s E<s>``. With ``lam`` the canonical class is ``lam H``.
    """
    N = datum.N
    names = [f"E{s + 1}" for s in range(len(datum.components))]
    classes = ("H",) + tuple(names)
    entries = {}
    k = len(classes)
    entries[(N + 1,) + (0,) * (k - 1)] = ZERO
    for s, comp in enumerate(datum.components):
        for a in range(N + 1):
            vec = [0] * k
            vec[0] = N - a
            vec[s + 1] = a + 1
            entries[tuple(vec)] = (-1) ** a * comp.m * c_value(comp, s, a, datum.truncation)
    zeros = []
    for s in range(len(names)):
        for t in range(s + 1, len(names)):
            pat = [0] * k
            pat[s + 1] = pat[t + 1] = 1
            zeros.append(tuple(pat))
    table = IntersectionTable(classes, N + 1, entries, tuple(zeros))
    eps = SparsePoly.var(EPS)
    polarization = {"H": ONE}
    for nm in names:
        polarization[nm] = -eps
    canonical = None
    cp = None
    if lam is not None:
        lam = Fraction(lam)
        canonical = {"H": SparsePoly.const(lam)} if lam else {}
        cp = (lam * datum.V,) + (None,) * min(datum.n, N - 1)
    fib = FibrationDatum(datum.n, N - datum.n, (None,) * datum.n + (datum.V,), cp)
    variables = sorted(table.variables() - {EPS})
    return TestConfigDatum(
        fibration=fib,
        table=table,
        polarization=polarization,
        base_pullback={"H": ONE},
        twist=None,
        canonical=canonical,
        klog=None,
        exceptionals=tuple(Exceptional(nm, c.b, c.A) for nm, c in zip(names, datum.components)),
        variables=tuple(variables),
        declared_trivial=not datum.components,
        declared_normalized=True,
        name=name or "normal-cone",
    )


# ---------------------------------------------------------------- catalog


_COMPONENT_KEYS = {"codim", "m", "deg", "center", "A", "fiber_type", "b", "tails"}


def load_cone(obj, *, truncation: Optional[int] = None, pointer: str = "") -> NormalConeDatum:
    """Parse one catalog entry; ``truncation`` overrides the file's value."""
    if not isinstance(obj, dict):
        raise SchemaError("expected an object", pointer)
    for key in sorted(set(obj) - {"N", "n", "V", "truncation", "components", "name", "lambda", "level", "description"}):
        raise SchemaError("unknown field", f"{pointer}/{key}")

    def need_int(o, key, where, minimum):
        v = o.get(key)
        if not isinstance(v, int) or isinstance(v, bool) or v < minimum:
            raise SchemaError(f"expected an integer >= {minimum}", f"{where}/{key}")
        return v

    def need_scalar(o, key, where, default=None):
        if key not in o:
            if default is None:
                raise SchemaError("required field missing", f"{where}/{key}")
            return default
        try:
            return scalar(o[key])
        except (TypeError, ValueError) as exc:
            raise SchemaError(str(exc), f"{where}/{key}") from exc

    N = need_int(obj, "N", pointer, 1)
    n = need_int(obj, "n", pointer, 0)
    if n > N:
        raise SchemaError(f"n must not exceed N = {N}", f"{pointer}/n")
    V = need_scalar(obj, "V", pointer)
    if V <= 0:
        raise SchemaError("volume must be positive", f"{pointer}/V")
    trunc = obj.get("truncation", DEFAULT_TRUNCATION)
    if not isinstance(trunc, int) or isinstance(trunc, bool) or trunc < 0:
        raise SchemaError("expected a nonnegative integer", f"{pointer}/truncation")
    if truncation is not None:
        trunc = truncation
    comps = obj.get("components", [])
    if not isinstance(comps, list):
        raise SchemaError("expected a list", f"{pointer}/components")
    out = []
    for i, c in enumerate(comps):
        where = f"{pointer}/components/{i}"
        if not isinstance(c, dict):
            raise SchemaError("expected an object", where)
        for key in sorted(set(c) - _COMPONENT_KEYS):
            raise SchemaError("unknown field", f"{where}/{key}")
        codim = need_int(c, "codim", where, 1)
        if codim > N:
            raise SchemaError(f"codimension must lie in 1..{N}", f"{where}/codim")
        m = need_int(c, "m", where, 1)
        b = need_int(c, "b", where, 1) if "b" in c else 1
        deg = need_scalar(c, "deg", where)
        center = need_scalar(c, "center", where)
        for key, val in (("deg", deg), ("center", center)):
            if val <= 0:
                raise SchemaError("must be positive", f"{where}/{key}")
        A = need_scalar(c, "A", where, Fraction(0))
        ft = c.get("fiber_type", False)
        if not isinstance(ft, bool):
            raise SchemaError("expected a boolean", f"{where}/fiber_type")
        tails = {}
        raw_tails = c.get("tails", {})
        if not isinstance(raw_tails, dict):
            raise SchemaError("expected {order: value}", f"{where}/tails")
        for key, val in raw_tails.items():
            try:
                a = int(key)
            except ValueError:
                raise SchemaError("tail orders must be integers", f"{where}/tails/{key}") from None
            if not codim < a <= N:
                raise SchemaError(f"tail order must lie in {codim + 1}..{N}", f"{where}/tails/{key}")
            tails[a] = need_scalar(raw_tails, key, f"{where}/tails")
        out.append(ConeComponent(codim, m, deg, center, A, ft, b, tails))
    return NormalConeDatum(N, n, V, tuple(out), trunc)


def load_catalog(obj, *, truncation: Optional[int] = None) -> List[Tuple[str, NormalConeDatum, dict]]:
    """A catalog is one entry or a list of entries; returns ``(name, datum, raw)`` triples."""
    items = obj if isinstance(obj, list) else [obj]
    out = []
    for i, item in enumerate(items):
        pointer = f"/{i}" if isinstance(obj, list) else ""
        datum = load_cone(item, truncation=truncation, pointer=pointer)
        out.append((str(item.get("name", f"entry-{i}")), datum, item))
    return out
