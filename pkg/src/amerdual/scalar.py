"""Number-field helpers: exact rationals (the default) or floats with a fixed tolerance.

All pricing code is generic over the two fields.  Rational mode uses
``fractions.Fraction`` and exact comparisons; float mode compares with the
absolute tolerance ``EPS``.  ``-inf`` payoff entries travel as the float
``NEG_INF`` in either mode and never take part in arithmetic: they are
stripped out at LP-build time.
"""

from __future__ import annotations

from fractions import Fraction

RATIONAL = "rational"
FLOAT = "float"
MODES = (RATIONAL, FLOAT)

EPS = 1e-9  # absolute tolerance for every float-mode comparison
NEG_INF = float("-inf")


def is_neg_inf(x) -> bool:
    return isinstance(x, float) and x == NEG_INF


def zero(mode: str):
    return Fraction(0) if mode == RATIONAL else 0.0


def one(mode: str):
    return Fraction(1) if mode == RATIONAL else 1.0


def to_scalar(value, mode: str):
    """Coerce *value* into the field of *mode*; ``"-inf"`` passes through as NEG_INF.

    Rational mode reads JSON floats with decimal-literal semantics, so 0.5
    becomes 1/2 rather than the binary expansion of the double.
    """
    if value == "-inf" or is_neg_inf(value):
        return NEG_INF
    if mode == RATIONAL:
        if isinstance(value, bool):
            raise TypeError("boolean is not a scalar")
        if isinstance(value, Fraction):
            return value
        if isinstance(value, int):
            return Fraction(value)
        if isinstance(value, str):
            return Fraction(value)
        if isinstance(value, float):
            return Fraction(str(value))
        raise TypeError(f"cannot coerce {value!r} to a rational")
    if mode == FLOAT:
        if isinstance(value, str):
            return float(Fraction(value))
        return float(value)
    raise ValueError(f"unknown scalar mode {mode!r}")


def eq(a, b, mode: str) -> bool:
    if is_neg_inf(a) or is_neg_inf(b):
        return is_neg_inf(a) and is_neg_inf(b)
    if mode == RATIONAL:
        return a == b
    return abs(a - b) <= EPS


def leq(a, b, mode: str) -> bool:
    if is_neg_inf(a):
        return True
    if is_neg_inf(b):
        return False
    if mode == RATIONAL:
        return a <= b
    return a <= b + EPS


def is_zero(a, mode: str) -> bool:
    if mode == RATIONAL:
        return a == 0
    return abs(a) <= EPS


def scalar_to_json(x):
    """Serialize a scalar: integral rationals as ints, others as "p/q", floats as-is."""
    if is_neg_inf(x):
        return "-inf"
    if isinstance(x, Fraction):
        if x.denominator == 1:
            return int(x)
        return f"{x.numerator}/{x.denominator}"
    return x


def fmt(x) -> str:
    """Human rendering: exact fraction first, decimal as an annotation."""
    if is_neg_inf(x):
        return "-inf"
    if isinstance(x, Fraction):
        if x.denominator == 1:
            return str(x.numerator)
        return f"{x.numerator}/{x.denominator} (= {float(x):.6g})"
    return f"{x:.12g}"
