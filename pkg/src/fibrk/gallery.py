"""Bundled example data with known answers."""

from __future__ import annotations

import copy
from typing import Dict

# Degeneration over a surface base whose only nonzero products are E^3.H = t
# and E^4 = u. Every product containing the base class vanishes.
LCBASE = {
    "name": "lcbase",
    "description": "lc-base example: symbolic table with E^3.H = t, E^4 = u",
    "n": 2,
    "m": 1,
    "classes": ["H", "L", "E"],
    "variables": ["t", "u"],
    "total_degree": 4,
    "products": [
        {"exponents": {"E": 3, "H": 1}, "value": "t"},
        {"exponents": {"E": 4}, "value": "u"},
    ],
    "zero_default": [{"L": 1}, {"H": 4}, {"H": 3, "E": 1}, {"H": 2, "E": 2}],
    "exceptionals": [{"class": "E", "b": 1, "A": "0"}],
    "roles": {
        "polarization": {"H": "1", "E": "-eps"},
        "base_pullback": "H",
        "twist": "L",
        "canonical": {"H": "1", "L": "-4"},
    },
    "flags": {"normalized": True, "trivial": False},
    "fibration": {
        "mixed_volumes": ["1/3", "2/3", "1"],
        "canonical_products": ["-5/3", "-2/3", "1/3"],
    },
}

# Blow-up of the point (p, 0) in P^1 x P^1, polarized by H - eps E.
P1_POINT = {
    "name": "p1-point",
    "description": "slope test configuration of a point on the projective line",
    "n": 0,
    "m": 1,
    "classes": ["H", "E", "K"],
    "variables": [],
    "total_degree": 2,
    "products": [
        {"exponents": {"H": 2}, "value": "0"},
        {"exponents": {"H": 1, "E": 1}, "value": "0"},
        {"exponents": {"E": 2}, "value": "-1"},
        {"exponents": {"K": 1, "H": 1}, "value": "0"},
        {"exponents": {"K": 1, "E": 1}, "value": "0"},
        {"exponents": {"K": 2}, "value": "0"},
    ],
    "zero_default": [],
    "exceptionals": [{"class": "E", "b": 1, "A": "1"}],
    "roles": {
        "polarization": {"H": "1", "E": "-eps"},
        "base_pullback": "H",
        "canonical": "K",
        "klog": {"K": "1", "E": "1"},
    },
    "flags": {"normalized": True, "trivial": False},
    "fibration": {"mixed_volumes": ["1"], "canonical_products": ["-2"]},
}

TRIVIAL = {
    "name": "trivial",
    "description": "product test configuration of the projective line",
    "n": 0,
    "m": 1,
    "classes": ["H", "K"],
    "variables": [],
    "total_degree": 2,
    "products": [],
    "zero_default": [{"H": 2}, {"H": 1, "K": 1}, {"K": 2}],
    "exceptionals": [],
    "roles": {"polarization": "H", "base_pullback": "H", "canonical": "K"},
    "flags": {"normalized": True, "trivial": True},
    "fibration": {"mixed_volumes": ["1"], "canonical_products": ["-2"]},
}

# Normal-cone data: a codimension-3 lc center of a threefold fibered over a
# surface, not of fiber type.
FANO_CONE = {
    "name": "fano-cone",
    "description": "normal cone of a non-fiber-type lc center in a Fano fibration",
    "N": 3,
    "n": 2,
    "V": "1",
    "truncation": 4,
    "lambda": "1",
    "components": [
        {"codim": 3, "m": 1, "deg": "1", "center": "1", "A": "0", "fiber_type": False},
    ],
}

LC_CONE = {
    "name": "lc-cone",
    "description": "normal cone of a codimension-2 center with negative discrepancy",
    "N": 3,
    "n": 2,
    "V": "1",
    "truncation": 4,
    "level": 2,
    "components": [
        {"codim": 2, "m": 1, "deg": "3", "center": "2", "A": "-1", "fiber_type": False},
    ],
}

DATA: Dict[str, dict] = {
    "lcbase": LCBASE,
    "p1-point": P1_POINT,
    "trivial": TRIVIAL,
}

CONES: Dict[str, dict] = {
    "fano-cone": FANO_CONE,
    "lc-cone": LC_CONE,
}

# Sign hypotheses each example is run under by the examples command.
ASSUMPTIONS: Dict[str, list] = {
    "lcbase": ["u=0"],
}


def names() -> list:
    return sorted(DATA) + sorted(CONES)


def get(name: str) -> dict:
    if name in DATA:
        return copy.deepcopy(DATA[name])
    if name in CONES:
        return copy.deepcopy(CONES[name])
    raise KeyError(f"unknown example {name!r}; choose from {', '.join(names())}")
