"""Exact rational arithmetic helpers.

``Rational`` is :class:`fractions.Fraction`: arbitrary precision, always
reduced, denominator positive.  The helpers here add the few conveniences the
rest of the package needs (sign, parsing, compact formatting).
"""
from __future__ import annotations

from fractions import Fraction

Rational = Fraction


def normalize(num: int, den: int) -> Rational:
    """Return num/den in lowest terms with a positive denominator."""
    if den == 0:
        raise ZeroDivisionError("denominator is zero")
    return Fraction(num, den)


def sign(value) -> int:
    """Sign of an exact or float value as -1, 0 or 1."""
    if value > 0:
        return 1
    if value < 0:
        return -1
    return 0


def to_rational(value) -> Rational:
    """Coerce ints, Fractions and strings like '7/3' or '0.5' to a Rational.

    Floats are rejected: a float silently carries binary rounding into exact
    code paths.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("bool is not a rational value")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"not a rational number: {value!r}") from exc
    raise TypeError(f"cannot convert {type(value).__name__} to Rational exactly")


def fmt(value: Rational) -> str:
    """'3' for integers, '4/3' otherwise."""
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"
