"""Exact nonnegative rationals and binomial coefficients.

Every light transmission and contrast value in the package is a
:class:`Ratio`. It is a thin layer over :class:`fractions.Fraction` that
keeps the value reduced (Fraction already does) and refuses to represent
negative numbers: a negative intermediate means a broken scheme upstream.
"""

from __future__ import annotations

import math
from decimal import Decimal, localcontext
from fractions import Fraction
from numbers import Rational

__all__ = [
    "Ratio",
    "NegativeRatioError",
    "ratio",
    "add",
    "sub",
    "mul",
    "div",
    "binom",
    "as_ratio",
    "parse_ratio",
    "to_decimal_str",
]


class NegativeRatioError(ValueError):
    """Raised when a computation would leave the nonnegative rationals."""


class Ratio(Fraction):
    """Reduced nonnegative rational with arbitrary-precision terms.

    Compares and hashes like the equal :class:`~fractions.Fraction`, so
    ``Ratio(6, 105) == Fraction(2, 35)``. Arithmetic between ratios
    stays inside the type; subtraction that would go negative raises.
    """

    __slots__ = ()

    def __new__(cls, numerator=0, denominator=None):
        self = super().__new__(cls, numerator, denominator)
        if self._numerator < 0:
            raise NegativeRatioError(f"negative value {self._numerator}/{self._denominator}")
        return self

    def __add__(self, other):
        result = Fraction.__add__(self, other)
        return as_ratio(result) if isinstance(result, Fraction) else result

    __radd__ = __add__

    def __sub__(self, other):
        result = Fraction.__sub__(self, other)
        return as_ratio(result) if isinstance(result, Fraction) else result

    def __rsub__(self, other):
        result = Fraction.__rsub__(self, other)
        return as_ratio(result) if isinstance(result, Fraction) else result

    def __mul__(self, other):
        result = Fraction.__mul__(self, other)
        return as_ratio(result) if isinstance(result, Fraction) else result

    __rmul__ = __mul__

    def __truediv__(self, other):
        result = Fraction.__truediv__(self, other)
        return as_ratio(result) if isinstance(result, Fraction) else result

    def __rtruediv__(self, other):
        result = Fraction.__rtruediv__(self, other)
        return as_ratio(result) if isinstance(result, Fraction) else result

    def __pow__(self, other):
        result = Fraction.__pow__(self, other)
        return as_ratio(result) if isinstance(result, Fraction) else result

    def __repr__(self):
        return f"Ratio({self._numerator}, {self._denominator})"

    @property
    def fraction_str(self) -> str:
        """Always ``num/den``, even for integers (``0/1``, ``1/1``)."""
        return f"{self._numerator}/{self._denominator}"

    def to_json(self) -> dict:
        return {"num": self._numerator, "den": self._denominator}


def as_ratio(value) -> Ratio:
    if isinstance(value, Ratio):
        return value
    if isinstance(value, Rational):
        return Ratio(value.numerator, value.denominator)
    raise TypeError(f"cannot convert {type(value).__name__} to Ratio exactly")


def ratio(num: int, den: int = 1) -> Ratio:
    """Build the reduced ratio ``num/den``.

    >>> ratio(15, 96)
    Ratio(5, 32)
    """
    if den == 0:
        raise ZeroDivisionError("ratio with zero denominator")
    return Ratio(num, den)


def add(a: Ratio, b: Ratio) -> Ratio:
    return as_ratio(a) + as_ratio(b)


def sub(a: Ratio, b: Ratio) -> Ratio:
    return as_ratio(a) - as_ratio(b)


def mul(a: Ratio, b: Ratio) -> Ratio:
    return as_ratio(a) * as_ratio(b)


def div(a: Ratio, b: Ratio) -> Ratio:
    if b == 0:
        raise ZeroDivisionError("division by zero ratio")
    return as_ratio(a) / as_ratio(b)


def binom(n: int, k: int) -> int:
    """``C(n, k)``, zero when ``k`` falls outside ``0..n``."""
    if n < 0:
        raise ValueError(f"binom needs n >= 0, got {n}")
    if k < 0 or k > n:
        return 0
    return math.comb(n, k)


def parse_ratio(text: str) -> Ratio:
    """Parse ``"num/den"`` or a bare integer."""
    num, sep, den = text.strip().partition("/")
    try:
        return ratio(int(num), int(den) if sep else 1)
    except ValueError as exc:
        if isinstance(exc, NegativeRatioError):
            raise
        raise ValueError(f"not a ratio: {text!r}") from None


def to_decimal_str(value: Ratio, digits: int = 6) -> str:
    """Render with ``digits`` significant digits, computed exactly."""
    if digits < 1:
        raise ValueError("digits must be >= 1")
    value = as_ratio(value)
    with localcontext() as ctx:
        ctx.prec = digits
        d = Decimal(value.numerator) / Decimal(value.denominator)
    return format(d, "g") if d != 0 else "0"
