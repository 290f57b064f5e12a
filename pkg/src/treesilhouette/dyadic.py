"""Exact arithmetic on numbers of the form p / 2**q."""

from __future__ import annotations

from fractions import Fraction
from functools import total_ordering
from numbers import Integral, Rational


@total_ordering
class DyadicRational:
    """An exact dyadic rational ``numerator / 2**exponent``.

    Values are kept in canonical form: either the exponent is zero or the
    numerator is odd.  Zero is ``0 / 2**0``.
    """

    __slots__ = ("numerator", "exponent")

    def __init__(self, numerator: int = 0, exponent: int = 0):
        numerator = int(numerator)
        exponent = int(exponent)
        if exponent < 0:
            numerator <<= -exponent
            exponent = 0
        if numerator == 0:
            exponent = 0
        elif exponent:
            # strip common factors of two
            shift = min((numerator & -numerator).bit_length() - 1, exponent)
            numerator >>= shift
            exponent -= shift
        object.__setattr__(self, "numerator", numerator)
        object.__setattr__(self, "exponent", exponent)

    def __setattr__(self, name, value):
        raise AttributeError("DyadicRational is immutable")

    @classmethod
    def coerce(cls, value) -> "DyadicRational":
        """Convert ints, Fractions and floats (all of which are dyadic) exactly."""
        if isinstance(value, DyadicRational):
            return value
        if isinstance(value, Integral):
            return cls(int(value), 0)
        if isinstance(value, float):
            value = Fraction(value)
        if isinstance(value, Rational):
            den = value.denominator
            if den & (den - 1):
                raise ValueError(f"{value} is not a dyadic rational")
            return cls(value.numerator, den.bit_length() - 1)
        raise TypeError(f"cannot convert {type(value).__name__} to DyadicRational")

    # -- arithmetic ---------------------------------------------------------

    def _align(self, other: "DyadicRational"):
        e = max(self.exponent, other.exponent)
        return (self.numerator << (e - self.exponent),
                other.numerator << (e - other.exponent), e)

    def __add__(self, other):
        try:
            other = DyadicRational.coerce(other)
        except (TypeError, ValueError):
            return NotImplemented
        a, b, e = self._align(other)
        return DyadicRational(a + b, e)

    __radd__ = __add__

    def __neg__(self):
        return DyadicRational(-self.numerator, self.exponent)

    def __sub__(self, other):
        try:
            other = DyadicRational.coerce(other)
        except (TypeError, ValueError):
            return NotImplemented
        a, b, e = self._align(other)
        return DyadicRational(a - b, e)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        try:
            other = DyadicRational.coerce(other)
        except (TypeError, ValueError):
            return NotImplemented
        return DyadicRational(self.numerator * other.numerator,
                              self.exponent + other.exponent)

    __rmul__ = __mul__

    def scale_pow2(self, k: int) -> "DyadicRational":
        """Multiply by ``2**k`` (``k`` may be negative)."""
        if k >= 0:
            return DyadicRational(self.numerator << k, self.exponent)
        return DyadicRational(self.numerator, self.exponent - k)

    def __abs__(self):
        return DyadicRational(abs(self.numerator), self.exponent)

    # -- comparison ---------------------------------------------------------

    def __eq__(self, other):
        if isinstance(other, DyadicRational):
            return (self.numerator, self.exponent) == (other.numerator, other.exponent)
        if isinstance(other, (Integral, Rational)):
            return Fraction(self.numerator, 1 << self.exponent) == other
        if isinstance(other, float):
            return float(self) == other and Fraction(other) == self.to_fraction()
        return NotImplemented

    def __lt__(self, other):
        try:
            other = DyadicRational.coerce(other)
        except (TypeError, ValueError):
            return NotImplemented
        a, b, _ = self._align(other)
        return a < b

    def __hash__(self):
        return hash(self.to_fraction())

    # -- conversion ---------------------------------------------------------

    def to_fraction(self) -> Fraction:
        return Fraction(self.numerator, 1 << self.exponent)

    def __float__(self):
        return self.numerator / (1 << self.exponent) if self.exponent < 1075 \
            else float(self.to_fraction())

    def __bool__(self):
        return self.numerator != 0

    def __repr__(self):
        return f"DyadicRational({self.numerator}, {self.exponent})"

    def __str__(self):
        return f"{self.numerator}/{1 << self.exponent}"


ZERO = DyadicRational(0)
ONE = DyadicRational(1)
