"""Named divisor classes, intersection tables and the datum model.

A *combo* is a formal linear combination of classes with polynomial
coefficients, stored as a ``{class: SparsePoly}`` dict. Products of combos are
expanded multilinearly and contracted against an :class:`IntersectionTable`.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .algebra import (
    EPS,
    J,
    ONE,
    ZERO,
    SparsePoly,
    as_poly,
    binomial,
    format_scalar,
)
from .errors import (
    DegenerateVolume,
    DegreeMismatch,
    IdentityViolation,
    MissingIntersectionNumber,
)

Combo = Dict[str, SparsePoly]
ExpVec = Tuple[int, ...]


def combo(*pairs, **kw) -> Combo:
    """Build a combo: ``combo(("H", 1), ("E", -eps))`` or ``combo(H=1)``."""
    out: Combo = {}
    for name, coeff in list(pairs) + list(kw.items()):
        c = out.get(name, ZERO) + as_poly(coeff)
        if c.is_zero():
            out.pop(name, None)
        else:
            out[name] = c
    return out


def combo_add(*combos: Mapping[str, SparsePoly]) -> Combo:
    return combo(*(item for c in combos for item in c.items()))


def combo_scale(c: Mapping[str, SparsePoly], k) -> Combo:
    k = as_poly(k)
    return combo(*((name, coeff * k) for name, coeff in c.items()))


def format_monomial(classes: Sequence[str], vec: ExpVec) -> str:
    parts = [name if e == 1 else f"{name}^{e}" for name, e in zip(classes, vec) if e]
    return "*".join(parts) or "1"


@dataclass(frozen=True)
class IntersectionTable:
    """Top intersection products over named classes.

    ``entries`` maps exponent vectors (aligned with ``classes``) to values.
    A monomial missing from ``entries`` is an error unless it is divisible by
    one of the ``zero_default`` patterns, in which case it is zero.
    """

    classes: Tuple[str, ...]
    total_degree: int
    entries: Mapping[ExpVec, SparsePoly]
    zero_default: Tuple[ExpVec, ...] = ()

    def __post_init__(self):
        if len(set(self.classes)) != len(self.classes) or any(not c for c in self.classes):
            raise ValueError("class names must be unique and nonempty")
        for vec in self.entries:
            if len(vec) != len(self.classes) or sum(vec) != self.total_degree:
                raise DegreeMismatch(
                    f"entry {format_monomial(self.classes, vec)} has degree {sum(vec)}, "
                    f"expected {self.total_degree}"
                )

    @classmethod
    def from_products(
        cls,
        classes: Sequence[str],
        total_degree: int,
        products: Mapping[str, object] | Iterable[Tuple[Mapping[str, int], object]],
        zero_default: Iterable[Mapping[str, int]] = (),
    ) -> "IntersectionTable":
        """Convenience constructor from ``{class: exponent}`` monomials."""
        classes = tuple(classes)
        items = products.items() if isinstance(products, Mapping) else products
        entries = {}
        for mono, value in items:
            if isinstance(mono, str):
                mono = parse_class_monomial(mono)
            entries[cls._vec(classes, mono)] = as_poly(value)
        zeros = tuple(cls._vec(classes, z) for z in zero_default)
        return cls(classes, total_degree, entries, zeros)

    @staticmethod
    def _vec(classes: Sequence[str], mono: Mapping[str, int]) -> ExpVec:
        unknown = set(mono) - set(classes)
        if unknown:
            raise KeyError(f"unknown class(es) {', '.join(sorted(unknown))}")
        return tuple(mono.get(c, 0) for c in classes)

    def vector(self, monomial) -> ExpVec:
        if isinstance(monomial, Mapping):
            return self._vec(self.classes, monomial)
        vec = tuple(monomial)
        if len(vec) != len(self.classes):
            raise DegreeMismatch("exponent vector length does not match the class list")
        return vec

    def is_default_zero(self, vec: ExpVec) -> bool:
        return any(all(e >= p for e, p in zip(vec, pat)) for pat in self.zero_default)

    def value(self, monomial) -> SparsePoly:
        vec = self.vector(monomial)
        if sum(vec) != self.total_degree:
            raise DegreeMismatch(
                f"monomial {format_monomial(self.classes, vec)} has degree {sum(vec)}, "
                f"table has total degree {self.total_degree}"
            )
        hit = self.entries.get(vec)
        if hit is not None:
            return hit
        if self.is_default_zero(vec):
            return ZERO
        raise MissingIntersectionNumber(format_monomial(self.classes, vec))

    def renamed(self, mapping: Mapping[str, str]) -> "IntersectionTable":
        return replace(self, classes=tuple(mapping.get(c, c) for c in self.classes))

    def variables(self) -> frozenset:
        return frozenset().union(*(v.variables() for v in self.entries.values()))

    def to_json(self) -> dict:
        return {
            "classes": list(self.classes),
            "total_degree": self.total_degree,
            "products": [
                {"exponents": {c: e for c, e in zip(self.classes, vec) if e}, "value": v.to_json()}
                for vec, v in sorted(self.entries.items())
            ],
            "zero_default": [{c: e for c, e in zip(self.classes, pat) if e} for pat in self.zero_default],
        }


def parse_class_monomial(text: str) -> Dict[str, int]:
    """Parse ``"H^2*E*L"`` into ``{"H": 2, "E": 1, "L": 1}``."""
    out: Dict[str, int] = {}
    for part in text.replace(" ", "").split("*"):
        if not part:
            continue
        name, _, exp = part.partition("^")
        out[name] = out.get(name, 0) + (int(exp) if exp else 1)
    return out


def eval_product(table: IntersectionTable, monomial) -> SparsePoly:
    """Look up one top intersection number."""
    return table.value(monomial)


def _combo_power(classes: Sequence[str], c: Mapping[str, SparsePoly], power: int) -> Dict[ExpVec, SparsePoly]:
    index = {name: i for i, name in enumerate(classes)}
    names = [name for name in c if not c[name].is_zero()]
    for name in names:
        if name not in index:
            raise MissingIntersectionNumber(f"class {name!r} is not in the table")
    out: Dict[ExpVec, SparsePoly] = {}
    if power == 0:
        return {tuple([0] * len(classes)): ONE}
    for split in _compositions(power, len(names)):
        coeff = SparsePoly.const(math.factorial(power))
        vec = [0] * len(classes)
        for name, k in zip(names, split):
            if k:
                coeff = coeff * (c[name] ** k) / math.factorial(k)
                vec[index[name]] += k
        key = tuple(vec)
        out[key] = out.get(key, ZERO) + coeff
    return out


def _compositions(total: int, parts: int):
    if parts == 0:
        if total == 0:
            yield ()
        return
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def expand_product(classes: Sequence[str], factors: Sequence[Tuple[Mapping[str, SparsePoly], int]]) -> Dict[ExpVec, SparsePoly]:
    """Multilinear expansion of ``prod combo_i^{power_i}`` into monomials."""
    acc: Dict[ExpVec, SparsePoly] = {tuple([0] * len(classes)): ONE}
    for c, power in factors:
        if power == 0:
            continue
        expanded = _combo_power(classes, c, power)
        nxt: Dict[ExpVec, SparsePoly] = {}
        for v1, c1 in acc.items():
            for v2, c2 in expanded.items():
                key = tuple(a + b for a, b in zip(v1, v2))
                nxt[key] = nxt.get(key, ZERO) + c1 * c2
        acc = {k: v for k, v in nxt.items() if not v.is_zero()}
    return acc


def intersect(table: IntersectionTable, *factors: Tuple[Mapping[str, SparsePoly], int]) -> SparsePoly:
    """Intersection number of ``combo_1^{p_1} * ... * combo_k^{p_k}``."""
    degree = sum(p for _, p in factors)
    if degree != table.total_degree:
        raise DegreeMismatch(f"product has degree {degree}, table has total degree {table.total_degree}")
    total = ZERO
    for vec, coeff in expand_product(table.classes, factors).items():
        total = total + coeff * table.value(vec)
    return total


@dataclass(frozen=True)
class FibrationDatum:
    """Numerical data of a polarized fiber space ``f: (X, H) -> (B, L)``.

    ``mixed_volumes[i]`` is ``H^(m+i) . L^(n-i)`` for ``i = 0..n`` and
    ``canonical_products[b]`` is ``K . H^(n+m-1-b) . L^b`` with ``K = K_X + Delta``.
    Unknown entries are ``None``.
    """

    n: int
    m: int
    mixed_volumes: Tuple[Optional[Fraction], ...]
    canonical_products: Optional[Tuple[Optional[Fraction], ...]] = None
    components: Tuple["FibrationDatum", ...] = ()

    def __post_init__(self):
        if self.n < 0 or self.m < 0:
            raise ValueError("dimensions must be nonnegative")
        if self.n + self.m < 1:
            raise ValueError("total dimension n + m must be positive")
        if len(self.mixed_volumes) != self.n + 1:
            raise ValueError(f"expected {self.n + 1} mixed volumes, got {len(self.mixed_volumes)}")
        for i, v in enumerate(self.mixed_volumes):
            if v is not None and v <= 0:
                raise DegenerateVolume(f"mixed volume H^{self.m + i}.L^{self.n - i} must be positive")
        if self.canonical_products is not None and len(self.canonical_products) != self.n_canonical:
            raise ValueError(f"expected {self.n_canonical} canonical products")

    @property
    def dim(self) -> int:
        return self.n + self.m

    @property
    def n_canonical(self) -> int:
        return min(self.n, self.dim - 1) + 1

    def _mv(self, i: int) -> Fraction:
        v = self.mixed_volumes[i]
        if v is None:
            raise MissingIntersectionNumber(f"H^{self.m + i}*L^{self.n - i} (fibration mixed volume)")
        return v

    def _cp(self, b: int) -> Fraction:
        if b > self.n:
            return Fraction(0)
        if self.canonical_products is None or self.canonical_products[b] is None:
            raise MissingIntersectionNumber(f"K*H^{self.dim - 1 - b}*L^{b} (fibration canonical product)")
        return self.canonical_products[b]

    @property
    def volume(self) -> Fraction:
        """``V(H) = H^(n+m)``."""
        return self._mv(self.n)

    def mixed_volume(self, l_power: int) -> Fraction:
        """``H^(n+m-l_power) . L^l_power``; zero beyond the base dimension."""
        if l_power > self.n:
            return Fraction(0)
        return self._mv(self.n - l_power)

    def canonical_product(self, l_power: int) -> Fraction:
        return self._cp(l_power)

    def volume_poly(self) -> SparsePoly:
        """``g(j) = (H + jL)^(n+m)``."""
        N = self.dim
        x = SparsePoly.var(J)
        return sum(
            (binomial(N, k) * self._mv(self.n - k) * x ** k for k in range(self.n + 1)),
            ZERO,
        )

    def anticanonical_poly(self) -> SparsePoly:
        """``f(j) = -K . (H + jL)^(n+m-1)``."""
        N = self.dim
        x = SparsePoly.var(J)
        return sum(
            (-binomial(N - 1, k) * self._cp(k) * x ** k for k in range(self.n_canonical)),
            ZERO,
        )

    def scalar_curvature(self, which: str = "whole") -> Fraction:
        return scalar_curvature(self, which)

    def twisted(self, c) -> "FibrationDatum":
        """Data for ``H + cL`` in place of ``H``."""
        c = Fraction(c)
        mv = []
        for i in range(self.n + 1):
            try:
                mv.append(sum(
                    (binomial(self.m + i, k) * c ** k * self._mv(i - k) for k in range(i + 1)),
                    Fraction(0),
                ))
            except MissingIntersectionNumber:
                mv.append(None)
        cp = None
        if self.canonical_products is not None:
            cp = []
            for b in range(self.n_canonical):
                top = self.dim - 1 - b
                try:
                    cp.append(sum(
                        (binomial(top, k) * c ** k * self._cp(b + k) for k in range(top + 1)),
                        Fraction(0),
                    ))
                except MissingIntersectionNumber:
                    cp.append(None)
            cp = tuple(cp)
        return FibrationDatum(self.n, self.m, tuple(mv), cp, tuple(x.twisted(c) for x in self.components))

    def to_json(self) -> dict:
        out = {
            "mixed_volumes": [None if v is None else format_scalar(v) for v in self.mixed_volumes],
        }
        if self.canonical_products is not None:
            out["canonical_products"] = [None if v is None else format_scalar(v) for v in self.canonical_products]
        return out


def scalar_curvature(datum: FibrationDatum, which: str = "whole") -> Fraction:
    """Average scalar curvature ``S = -d (K . H^(d-1)) / H^d`` of the total space or a general fiber."""
    if which == "whole":
        d = datum.dim
        vol = datum.volume
        return -d * datum.canonical_product(0) / vol
    if which == "fiber":
        if datum.m == 0:
            return Fraction(0)
        vol = datum.mixed_volume(datum.n)
        return -datum.m * datum.canonical_product(datum.n) / vol
    raise ValueError("which must be 'whole' or 'fiber'")


@dataclass(frozen=True)
class Exceptional:
    """A component of the central fiber: its class, multiplicity ``b`` and log discrepancy ``A``."""

    cls: str
    b: int = 1
    A: Fraction = Fraction(0)


@dataclass(frozen=True)
class TestConfigDatum:
    """A compactified test configuration given by intersection numbers.

    Roles are combos over the table's classes:

    * ``polarization``: the compactified polarization
    * ``base_pullback``: pullback of the polarization ``H`` of ``X``
    * ``twist``: pullback of ``L`` from the base ``B``
    * ``canonical``: pullback of ``K_X + Delta``
    * ``klog``: the relative log canonical class over the projective line
    """

    __test__ = False  # not a pytest class

    fibration: FibrationDatum
    table: IntersectionTable
    polarization: Combo
    base_pullback: Combo
    twist: Optional[Combo] = None
    canonical: Optional[Combo] = None
    klog: Optional[Combo] = None
    exceptionals: Tuple[Exceptional, ...] = ()
    variables: Tuple[str, ...] = ()
    declared_trivial: bool = False
    declared_normalized: bool = False
    log_weights: Optional[Tuple[Fraction, Fraction]] = None
    name: str = ""

    def __post_init__(self):
        if self.table.total_degree != self.fibration.dim + 1:
            raise DegreeMismatch(
                f"table total degree {self.table.total_degree} != n + m + 1 = {self.fibration.dim + 1}"
            )
        known = set(self.table.classes)
        for ex in self.exceptionals:
            if ex.cls not in known:
                raise MissingIntersectionNumber(f"exceptional class {ex.cls!r} has no table rows")
            if ex.b < 1:
                raise ValueError("central fiber multiplicities must be positive")

    @property
    def dim(self) -> int:
        return self.fibration.dim

    @property
    def n(self) -> int:
        return self.fibration.n

    @property
    def m(self) -> int:
        return self.fibration.m

    def twist_combo(self) -> Combo:
        if self.twist is not None:
            return self.twist
        if self.n == 0:
            return {}
        raise MissingIntersectionNumber("twist role (pullback of L from the base) is not declared")

    def twisted(self, c) -> "TestConfigDatum":
        """The same degeneration viewed as one for ``(X, H + cL)``."""
        L = self.twist_combo()
        shift = combo_scale(L, c)
        return replace(
            self,
            fibration=self.fibration.twisted(c),
            polarization=combo_add(self.polarization, shift),
            base_pullback=combo_add(self.base_pullback, shift),
        )

    def renamed(self, mapping: Mapping[str, str]) -> "TestConfigDatum":
        def ren(c):
            return None if c is None else {mapping.get(k, k): v for k, v in c.items()}

        return replace(
            self,
            table=self.table.renamed(mapping),
            polarization=ren(self.polarization),
            base_pullback=ren(self.base_pullback),
            twist=ren(self.twist),
            canonical=ren(self.canonical),
            klog=ren(self.klog),
            exceptionals=tuple(replace(e, cls=mapping.get(e.cls, e.cls)) for e in self.exceptionals),
        )


def expand_twisted_power(
    datum: TestConfigDatum,
    aux: Optional[Mapping[str, SparsePoly]],
    total: int,
    *,
    cut: int = 0,
) -> SparsePoly:
    """``aux . (P + jL)^total . L^cut`` as a polynomial in ``j``, ``P`` the polarization.

    Expanded binomially: ``sum_k C(total, k) j^k aux . P^(total-k) . L^(k+cut)``.
    """
    L = datum.twist_combo() if (total or cut) else {}
    x = SparsePoly.var(J)
    out = ZERO
    for k in range(total + 1):
        if k + cut > 0 and not L:
            # trivial base: any positive power of L vanishes
            continue
        factors = [(datum.polarization, total - k), (L, k + cut)]
        if aux is not None:
            factors.append((aux, 1))
        val = intersect(datum.table, *factors)
        if not val.is_zero():
            out = out + binomial(total, k) * val * x ** k
    return out


def check_normalized(datum: TestConfigDatum) -> None:
    """Raise :class:`IdentityViolation` if a datum declared normalized is not."""
    if not datum.declared_normalized:
        return
    N = datum.dim
    val = intersect(datum.table, (datum.polarization, 1), (datum.base_pullback, N))
    if not val.is_zero():
        raise IdentityViolation(
            f"datum is declared normalized but P . H^{N} = {val} is nonzero, so J != -E"
        )


# ------------------------------------------------------------------ JSON


class _Collector:
    def __init__(self):
        self.errors: List[Tuple[str, str]] = []

    def add(self, pointer: str, message: str) -> None:
        self.errors.append((pointer or "/", message))


def _rational_or_none(value, col: _Collector, pointer: str):
    from .algebra import scalar

    if value is None:
        return None
    try:
        return scalar(value)
    except (TypeError, ValueError) as exc:
        col.add(pointer, str(exc))
        return None


def _load_poly(value, declared, col: _Collector, pointer: str) -> Optional[SparsePoly]:
    from .errors import SchemaError

    try:
        return SparsePoly.from_json(value, declared, pointer)
    except SchemaError as exc:
        col.add(exc.pointer, exc.detail)
        return None


def _load_combo(value, classes, declared, col: _Collector, pointer: str) -> Optional[Combo]:
    if isinstance(value, str):
        if value not in classes:
            col.add(pointer, f"unknown class {value!r}")
            return None
        return {value: ONE}
    if not isinstance(value, dict) or not value:
        col.add(pointer, "expected a class name or a nonempty {class: coefficient} object")
        return None
    out: Combo = {}
    for name, coeff in value.items():
        if name not in classes:
            col.add(f"{pointer}/{name}", f"unknown class {name!r}")
            continue
        p = _load_poly(coeff, declared, col, f"{pointer}/{name}")
        if p is not None and not p.is_zero():
            out[name] = p
    return out


_TOP_KEYS = {
    "n", "m", "classes", "variables", "total_degree", "products", "zero_default",
    "exceptionals", "roles", "flags", "fibration", "name", "log_weights", "description",
}


def load_datum(obj) -> TestConfigDatum:
    """Build a :class:`TestConfigDatum` from parsed JSON, raising on the first violation."""
    from .errors import SchemaError

    datum, errors = _load_datum(obj)
    if errors:
        pointer, message = errors[0]
        raise SchemaError(message, pointer)
    return datum


def datum_diagnostics(obj) -> List[Tuple[str, str]]:
    """All schema violations in a parsed datum, as ``(json_pointer, message)`` pairs."""
    return _load_datum(obj)[1]


def _load_datum(obj):
    col = _Collector()
    if not isinstance(obj, dict):
        col.add("/", "datum must be a JSON object")
        return None, col.errors
    for key in sorted(set(obj) - _TOP_KEYS):
        col.add(f"/{key}", "unknown field")

    def need_int(key, minimum=0):
        v = obj.get(key)
        if not isinstance(v, int) or isinstance(v, bool) or v < minimum:
            col.add(f"/{key}", f"expected an integer >= {minimum}")
            return None
        return v

    n = need_int("n")
    m = need_int("m")
    total = need_int("total_degree", 1)
    if None not in (n, m, total) and total != n + m + 1:
        col.add("/total_degree", f"total_degree must be n + m + 1 = {n + m + 1}")

    classes = obj.get("classes")
    if not isinstance(classes, list) or not classes or not all(isinstance(c, str) and c for c in classes):
        col.add("/classes", "expected a nonempty list of class names")
        classes = []
    elif len(set(classes)) != len(classes):
        col.add("/classes", "class names must be unique")

    variables = obj.get("variables", [])
    if not isinstance(variables, list) or not all(isinstance(v, str) and v.isidentifier() for v in variables):
        col.add("/variables", "expected a list of identifier strings")
        variables = []
    if J in variables:
        col.add("/variables", "'j' is reserved for the twist parameter")
    declared = set(variables) | {EPS}

    entries: Dict[ExpVec, SparsePoly] = {}
    products = obj.get("products", [])
    if not isinstance(products, list):
        col.add("/products", "expected a list")
        products = []
    for i, row in enumerate(products):
        where = f"/products/{i}"
        if not isinstance(row, dict) or set(row) != {"exponents", "value"}:
            col.add(where, "row must have exactly 'exponents' and 'value'")
            continue
        exps = row["exponents"]
        if not isinstance(exps, dict) or not all(isinstance(e, int) and not isinstance(e, bool) and e >= 0 for e in exps.values()):
            col.add(where + "/exponents", "expected {class: nonnegative int}")
            continue
        unknown = sorted(set(exps) - set(classes))
        if unknown:
            col.add(where + "/exponents", f"unknown class(es) {', '.join(unknown)}")
            continue
        vec = tuple(exps.get(c, 0) for c in classes)
        if total is not None and sum(vec) != total:
            col.add(
                where + "/exponents",
                f"monomial {format_monomial(classes, vec)} has degree {sum(vec)}, expected {total}",
            )
            continue
        if vec in entries:
            col.add(where, f"duplicate monomial {format_monomial(classes, vec)}")
            continue
        val = _load_poly(row["value"], declared, col, where + "/value")
        if val is not None:
            entries[vec] = val

    zeros = []
    for i, pat in enumerate(obj.get("zero_default", [])):
        where = f"/zero_default/{i}"
        if isinstance(pat, str):
            pat = parse_class_monomial(pat)
        if not isinstance(pat, dict) or not pat or not all(isinstance(e, int) and e >= 0 for e in pat.values()):
            col.add(where, "expected a nonempty {class: nonnegative int} pattern")
            continue
        unknown = sorted(set(pat) - set(classes))
        if unknown:
            col.add(where, f"unknown class(es) {', '.join(unknown)}")
            continue
        zeros.append(tuple(pat.get(c, 0) for c in classes))

    exceptionals = []
    for i, ex in enumerate(obj.get("exceptionals", [])):
        where = f"/exceptionals/{i}"
        if not isinstance(ex, dict) or "class" not in ex:
            col.add(where, "expected {class, b, A}")
            continue
        if ex["class"] not in classes:
            col.add(where + "/class", f"unknown class {ex['class']!r}")
            continue
        b = ex.get("b", 1)
        if not isinstance(b, int) or isinstance(b, bool) or b < 1:
            col.add(where + "/b", "multiplicity must be a positive integer")
            continue
        A = _rational_or_none(ex.get("A", 0), col, where + "/A")
        if A is None:
            continue
        exceptionals.append(Exceptional(ex["class"], b, A))

    roles = obj.get("roles")
    if not isinstance(roles, dict):
        col.add("/roles", "expected an object with at least 'polarization' and 'base_pullback'")
        roles = {}
    for key in sorted(set(roles) - {"polarization", "base_pullback", "twist", "canonical", "klog"}):
        col.add(f"/roles/{key}", "unknown role")
    loaded_roles = {}
    for key in ("polarization", "base_pullback", "twist", "canonical", "klog"):
        if key in roles:
            loaded_roles[key] = _load_combo(roles[key], classes, declared, col, f"/roles/{key}")
        elif key in ("polarization", "base_pullback"):
            col.add(f"/roles/{key}", "required role missing")

    flags = obj.get("flags", {})
    if not isinstance(flags, dict) or not all(isinstance(v, bool) for v in flags.values()):
        col.add("/flags", "expected {normalized: bool, trivial: bool}")
        flags = {}
    for key in sorted(set(flags) - {"normalized", "trivial"}):
        col.add(f"/flags/{key}", "unknown flag")

    fib = obj.get("fibration")
    mv = cp = None
    if not isinstance(fib, dict):
        col.add("/fibration", "expected {mixed_volumes: [...], canonical_products: [...]}")
    elif n is not None and m is not None:
        raw_mv = fib.get("mixed_volumes")
        if not isinstance(raw_mv, list) or len(raw_mv) != n + 1:
            col.add("/fibration/mixed_volumes", f"expected a list of {n + 1} entries (H^(m+i).L^(n-i), i=0..n)")
        else:
            mv = tuple(_rational_or_none(v, col, f"/fibration/mixed_volumes/{i}") for i, v in enumerate(raw_mv))
            for i, v in enumerate(mv):
                if v is not None and v <= 0:
                    col.add(f"/fibration/mixed_volumes/{i}", "mixed volumes must be positive")
            if mv[-1] is None:
                col.add(f"/fibration/mixed_volumes/{n}", "the volume H^(n+m) is required")
        if "canonical_products" in fib:
            raw_cp = fib["canonical_products"]
            want = min(n, n + m - 1) + 1
            if not isinstance(raw_cp, list) or len(raw_cp) != want:
                col.add("/fibration/canonical_products", f"expected a list of {want} entries (K.H^(n+m-1-b).L^b)")
            else:
                cp = tuple(_rational_or_none(v, col, f"/fibration/canonical_products/{i}") for i, v in enumerate(raw_cp))
        for key in sorted(set(fib) - {"mixed_volumes", "canonical_products"}):
            col.add(f"/fibration/{key}", "unknown field")

    log_weights = None
    if "log_weights" in obj:
        lw = obj["log_weights"]
        if not isinstance(lw, list) or len(lw) != 2:
            col.add("/log_weights", "expected [a0_hat, b0_hat]")
        else:
            log_weights = tuple(_rational_or_none(v, col, f"/log_weights/{i}") for i, v in enumerate(lw))

    if col.errors:
        return None, col.errors
    try:
        table = IntersectionTable(tuple(classes), total, entries, tuple(zeros))
        fibration = FibrationDatum(n, m, mv, cp)
        datum = TestConfigDatum(
            fibration=fibration,
            table=table,
            polarization=loaded_roles["polarization"],
            base_pullback=loaded_roles["base_pullback"],
            twist=loaded_roles.get("twist"),
            canonical=loaded_roles.get("canonical"),
            klog=loaded_roles.get("klog"),
            exceptionals=tuple(exceptionals),
            variables=tuple(variables),
            declared_trivial=flags.get("trivial", False),
            declared_normalized=flags.get("normalized", False),
            log_weights=log_weights,
            name=str(obj.get("name", "")),
        )
    except Exception as exc:  # noqa: BLE001 - surfaced as a diagnostic
        col.add("/", str(exc))
        return None, col.errors
    return datum, []


def _combo_json(c: Optional[Mapping[str, SparsePoly]]):
    if c is None:
        return None
    return {k: str(v) for k, v in c.items()}


def datum_to_json(datum: TestConfigDatum) -> dict:
    """Inverse of :func:`load_datum` (coefficients written as expression strings)."""
    out = {
        "name": datum.name,
        "n": datum.n,
        "m": datum.m,
        "variables": list(datum.variables),
        **datum.table.to_json(),
        "exceptionals": [
            {"class": e.cls, "b": e.b, "A": format_scalar(e.A)} for e in datum.exceptionals
        ],
        "roles": {
            k: _combo_json(getattr(datum, k))
            for k in ("polarization", "base_pullback", "twist", "canonical", "klog")
            if getattr(datum, k) is not None
        },
        "flags": {"normalized": datum.declared_normalized, "trivial": datum.declared_trivial},
        "fibration": datum.fibration.to_json(),
    }
    if datum.log_weights is not None:
        out["log_weights"] = [format_scalar(v) for v in datum.log_weights]
    return out
