"""Exact arithmetic over numbers of the form a + b*sqrt(3) with rational a, b.

Gasket geometry lives in this quadratic field: lattice atoms sit at
(p/2^k, q*sqrt(3)/2^k), polygon vertices at ((a + b*sqrt(3))/2^m, ...), and
every Python float is an exact dyadic rational, so squared distances and
boundary comparisons can be decided without rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Union

Scalar = Union[int, Fraction]


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, float, Rational)):
        return Fraction(x)
    raise TypeError(f"cannot interpret {type(x).__name__} as an exact rational")


def sqrt3_sign(a: Scalar, b: Scalar) -> int:
    """Exact sign of a + b*sqrt(3): -1, 0, or +1.

    Only a = b = 0 yields 0; sqrt(3) is irrational so a nonzero pair
    cannot cancel.
    """
    sa = (a > 0) - (a < 0)
    sb = (b > 0) - (b < 0)
    if sb == 0:
        return sa
    if sa == 0:
        return sb
    if sa == sb:
        return sa
    # Opposite signs: compare a^2 against 3 b^2; the larger magnitude wins.
    cmp = a * a - 3 * b * b
    mag = (cmp > 0) - (cmp < 0)
    return sa * mag


@dataclass(frozen=True)
class Root3:
    """Value a + b*sqrt(3), closed under +, -, * (sqrt(3)^2 = 3)."""

    a: Fraction
    b: Fraction = Fraction(0)

    @classmethod
    def of(cls, value) -> "Root3":
        """Coerce an int, float (exact dyadic), Fraction, or Root3."""
        if isinstance(value, Root3):
            return value
        return cls(_as_fraction(value))

    @classmethod
    def sqrt3_times(cls, value) -> "Root3":
        """The value value*sqrt(3) for rational value."""
        return cls(Fraction(0), _as_fraction(value))

    def __add__(self, other) -> "Root3":
        o = Root3.of(other)
        return Root3(self.a + o.a, self.b + o.b)

    __radd__ = __add__

    def __sub__(self, other) -> "Root3":
        o = Root3.of(other)
        return Root3(self.a - o.a, self.b - o.b)

    def __rsub__(self, other) -> "Root3":
        return Root3.of(other) - self

    def __mul__(self, other) -> "Root3":
        o = Root3.of(other)
        return Root3(self.a * o.a + 3 * self.b * o.b, self.a * o.b + self.b * o.a)

    __rmul__ = __mul__

    def __neg__(self) -> "Root3":
        return Root3(-self.a, -self.b)

    def sign(self) -> int:
        return sqrt3_sign(self.a, self.b)

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0

    def __lt__(self, other) -> bool:
        return (self - Root3.of(other)).sign() < 0

    def __le__(self, other) -> bool:
        return (self - Root3.of(other)).sign() <= 0

    def __gt__(self, other) -> bool:
        return (self - Root3.of(other)).sign() > 0

    def __ge__(self, other) -> bool:
        return (self - Root3.of(other)).sign() >= 0

    def __float__(self) -> float:
        return float(self.a) + float(self.b) * math.sqrt(3.0)

    def __repr__(self) -> str:
        return f"Root3({self.a!s}, {self.b!s})"
