"""Exact non-Archimedean functionals and f-stability levels from intersection numbers."""

from __future__ import annotations

from .algebra import EPS, J, RationalFn, SparsePoly, parse_poly
from .errors import FibrkError
from .intersection import FibrationDatum, IntersectionTable, TestConfigDatum, load_datum

__all__ = [
    "EPS",
    "J",
    "FibrationDatum",
    "FibrkError",
    "IntersectionTable",
    "RationalFn",
    "SparsePoly",
    "TestConfigDatum",
    "load_datum",
    "parse_poly",
]

__version__ = "0.1.0"
