"""Exact rational scalars.

Every number in pivotlab is a :class:`fractions.Fraction`.  Fractions are
always kept in lowest terms with a positive denominator, and Python integers
are unbounded, so nothing here can round or overflow.  This module adds the
strict literal grammar used by the text formats and a few helpers that refuse
floats.
"""

from __future__ import annotations

import enum
import re
from fractions import Fraction
from numbers import Rational as _RationalABC

Rational = Fraction

_LITERAL = re.compile(r"-?[0-9]+(?:/[0-9]+)?")

ZERO = Fraction(0)
ONE = Fraction(1)


class RationalSyntaxError(ValueError):
    """Raised for text that is not a ``[-]digits[/digits]`` literal."""


class Ordering(enum.Enum):
    LESS = -1
    EQUAL = 0
    GREATER = 1


def as_rational(value: int | Fraction) -> Fraction:
    """Coerce an int or Fraction; floats and Decimals are rejected."""
    if isinstance(value, bool):
        raise TypeError("bool is not a rational scalar")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, _RationalABC)):
        return Fraction(value)
    raise TypeError(f"expected an exact rational, got {type(value).__name__}")


def parse_rational(text: str) -> Fraction:
    if not _LITERAL.fullmatch(text):
        raise RationalSyntaxError(f"malformed rational literal: {text!r}")
    num, _, den = text.partition("/")
    if den and int(den) == 0:
        raise ZeroDivisionError(f"zero denominator in literal {text!r}")
    return Fraction(int(num), int(den) if den else 1)


def format_rational(value: int | Fraction) -> str:
    value = as_rational(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def approx(value: int | Fraction, digits: int = 12) -> str:
    """Decimal rendering for display next to the exact literal, never instead of it."""
    value = as_rational(value)
    return f"{float(value):.{digits}g}"


_OPS = {
    "add": lambda a, b: a + b,
    "sub": lambda a, b: a - b,
    "mul": lambda a, b: a * b,
    "div": lambda a, b: a / b,
}


def arith(a: int | Fraction, b: int | Fraction, op: str) -> Fraction:
    try:
        fn = _OPS[op]
    except KeyError:
        raise ValueError(f"unknown operation {op!r}") from None
    return fn(as_rational(a), as_rational(b))


def compare(a: int | Fraction, b: int | Fraction) -> Ordering:
    # Fraction comparison cross-multiplies integers; no float is involved.
    a, b = as_rational(a), as_rational(b)
    if a < b:
        return Ordering.LESS
    if a > b:
        return Ordering.GREATER
    return Ordering.EQUAL
