"""Exception hierarchy.

Every error raised by the library derives from :class:`FibrkError`. The CLI
maps :class:`SchemaError` to exit code 2 and every other subclass to exit
code 3.
"""

from __future__ import annotations


class FibrkError(Exception):
    """Base class for all library errors."""


class SchemaError(FibrkError):
    """Input does not match the expected JSON layout.

    ``pointer`` is a JSON pointer to the offending field.
    """

    def __init__(self, message: str, pointer: str = ""):
        super().__init__(f"{pointer or '/'}: {message}")
        self.pointer = pointer or "/"
        self.detail = message


class UndeclaredVariable(SchemaError):
    pass


class ZeroDivisor(FibrkError, ZeroDivisionError):
    pass


class MixedVariableDivision(FibrkError):
    pass


class ZeroPolynomial(FibrkError):
    pass


class DegreeMismatch(FibrkError):
    pass


class MissingIntersectionNumber(FibrkError):
    def __init__(self, monomial: str):
        super().__init__(f"missing intersection number {monomial}")
        self.monomial = monomial


class DegenerateVolume(FibrkError):
    pass


class DegreeOverflow(FibrkError):
    pass


class DimensionMismatch(FibrkError):
    pass


class IndexOutOfRange(FibrkError, IndexError):
    pass


class PreconditionUnverifiable(FibrkError):
    pass


class InsufficientComponents(FibrkError):
    pass


class IdentityViolation(FibrkError):
    """A datum declared an identity (e.g. normalization) that fails on evaluation."""
