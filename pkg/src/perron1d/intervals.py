"""Exact interval arithmetic with rational endpoints.

Used for every certified comparison in the package: endpoints are
Fractions, ring operations are exact, and only square roots round
(outward, via integer square roots).  A complex enclosure is a rectangle
of two intervals.
"""

from __future__ import annotations

from fractions import Fraction
from math import isqrt
from typing import Union

Rat = Union[int, Fraction]

_SQRT_BITS = 64


def sqrt_lower(x: Fraction, bits: int = _SQRT_BITS) -> Fraction:
    """Rational lower bound for sqrt(x), x >= 0."""
    if x < 0:
        raise ValueError("sqrt of negative")
    if x == 0:
        return Fraction(0)
    scale = 1 << bits
    n = x.numerator * scale * scale * x.denominator
    return Fraction(isqrt(n), scale * x.denominator)


def sqrt_upper(x: Fraction, bits: int = _SQRT_BITS) -> Fraction:
    if x < 0:
        raise ValueError("sqrt of negative")
    if x == 0:
        return Fraction(0)
    scale = 1 << bits
    n = x.numerator * scale * scale * x.denominator
    r = isqrt(n)
    if r * r < n:
        r += 1
    return Fraction(r, scale * x.denominator)


class Interval:
    """Closed rational interval [lo, hi]."""

    __slots__ = ("lo", "hi")

    def __init__(self, lo: Rat, hi: Rat | None = None):
        if hi is None:
            hi = lo
        lo = Fraction(lo)
        hi = Fraction(hi)
        if lo > hi:
            raise ValueError(f"empty interval [{lo}, {hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    def __setattr__(self, name, value):
        raise AttributeError("Interval is immutable")

    def __repr__(self):
        return f"Interval({self.lo}, {self.hi})"

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def round_out(self, bits: int) -> "Interval":
        """Outward rounding to endpoints with denominator 2^bits; bounds
        coefficient growth in long interval computations."""
        s = 1 << bits
        lo = self.lo * s
        hi = self.hi * s
        lo_n = lo.numerator // lo.denominator
        hi_n = -((-hi.numerator) // hi.denominator)
        return Interval(Fraction(lo_n, s), Fraction(hi_n, s))

    def contains(self, x: Rat) -> bool:
        return self.lo <= x <= self.hi

    def contains_interval(self, other: "Interval") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi

    def overlaps(self, other: "Interval") -> bool:
        return not (self.hi < other.lo or other.hi < self.lo)

    def __add__(self, other):
        other = _coerce(other)
        return Interval(self.lo + other.lo, self.hi + other.hi)

    __radd__ = __add__

    def __neg__(self):
        return Interval(-self.hi, -self.lo)

    def __sub__(self, other):
        return self + (-_coerce(other))

    def __rsub__(self, other):
        return _coerce(other) + (-self)

    def __mul__(self, other):
        other = _coerce(other)
        vals = (
            self.lo * other.lo,
            self.lo * other.hi,
            self.hi * other.lo,
            self.hi * other.hi,
        )
        return Interval(min(vals), max(vals))

    __rmul__ = __mul__

    def inverse(self) -> "Interval":
        if self.lo <= 0 <= self.hi:
            raise ZeroDivisionError("interval contains zero")
        return Interval(1 / self.hi, 1 / self.lo)

    def __truediv__(self, other):
        return self * _coerce(other).inverse()

    def abs(self) -> "Interval":
        if self.lo >= 0:
            return self
        if self.hi <= 0:
            return -self
        return Interval(0, max(-self.lo, self.hi))

    def square(self) -> "Interval":
        a = self.abs()
        return Interval(a.lo * a.lo, a.hi * a.hi)

    def __pow__(self, n: int) -> "Interval":
        if n < 0:
            return self.inverse() ** (-n)
        out = Interval(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base.square()
            n >>= 1
        return out

    def sqrt(self) -> "Interval":
        if self.lo < 0:
            raise ValueError("sqrt of interval with negative part")
        return Interval(sqrt_lower(self.lo), sqrt_upper(self.hi))

    def sign(self) -> int | None:
        """1, -1, or 0 when certain; None when the interval straddles zero."""
        if self.lo > 0:
            return 1
        if self.hi < 0:
            return -1
        if self.lo == self.hi == 0:
            return 0
        return None

    def __lt__(self, other):
        other = _coerce(other)
        return self.hi < other.lo

    def __gt__(self, other):
        other = _coerce(other)
        return self.lo > other.hi

    def to_float(self) -> float:
        return float(self.mid)


def _coerce(x) -> Interval:
    if isinstance(x, Interval):
        return x
    return Interval(Fraction(x))


class ComplexBox:
    """Axis-aligned rectangle enclosing a complex value."""

    __slots__ = ("re", "im")

    def __init__(self, re: Interval | Rat, im: Interval | Rat = 0):
        object.__setattr__(self, "re", _coerce(re))
        object.__setattr__(self, "im", _coerce(im))

    def __setattr__(self, name, value):
        raise AttributeError("ComplexBox is immutable")

    def __repr__(self):
        return f"ComplexBox({self.re}, {self.im})"

    @classmethod
    def from_disk(cls, center: complex | Fraction, radius: Rat) -> "ComplexBox":
        r = Fraction(radius)
        if isinstance(center, complex):
            cre, cim = Fraction(center.real), Fraction(center.imag)
        else:
            cre, cim = Fraction(center), Fraction(0)
        return cls(Interval(cre - r, cre + r), Interval(cim - r, cim + r))

    def __add__(self, other):
        other = _coerce_box(other)
        return ComplexBox(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __neg__(self):
        return ComplexBox(-self.re, -self.im)

    def __sub__(self, other):
        return self + (-_coerce_box(other))

    def __rsub__(self, other):
        return _coerce_box(other) + (-self)

    def __mul__(self, other):
        other = _coerce_box(other)
        return ComplexBox(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __rmul__ = __mul__

    def round_out(self, bits: int) -> "ComplexBox":
        return ComplexBox(self.re.round_out(bits), self.im.round_out(bits))

    def conj(self) -> "ComplexBox":
        return ComplexBox(self.re, -self.im)

    def modulus_squared(self) -> Interval:
        return self.re.square() + self.im.square()

    def modulus(self) -> Interval:
        return self.modulus_squared().sqrt()

    def inverse(self) -> "ComplexBox":
        m2 = self.modulus_squared().inverse()
        return ComplexBox(self.re * m2, -self.im * m2)

    def __truediv__(self, other):
        return self * _coerce_box(other).inverse()

    def contains_zero(self) -> bool:
        return self.re.contains(0) and self.im.contains(0)

    def overlaps(self, other: "ComplexBox") -> bool:
        return self.re.overlaps(other.re) and self.im.overlaps(other.im)

    def is_real_possible(self) -> bool:
        return self.im.contains(0)

    @property
    def width(self) -> Fraction:
        return max(self.re.width, self.im.width)

    def mid_complex(self) -> complex:
        return complex(self.re.to_float(), self.im.to_float())


def _coerce_box(x) -> ComplexBox:
    if isinstance(x, ComplexBox):
        return x
    if isinstance(x, Interval):
        return ComplexBox(x, Interval(0))
    if isinstance(x, complex):
        return ComplexBox(Interval(Fraction(x.real)), Interval(Fraction(x.imag)))
    return ComplexBox(Interval(Fraction(x)), Interval(0))


def _coeff_list(coeffs):
    return list(getattr(coeffs, "coeffs", coeffs))


def eval_poly_box(coeffs, box: ComplexBox) -> ComplexBox:
    """Horner evaluation of a polynomial (any exact coefficients) on a box."""
    acc = ComplexBox(Interval(0), Interval(0))
    for c in reversed(_coeff_list(coeffs)):
        acc = acc * box + _coerce_box(c)
    return acc


def eval_poly_interval(coeffs, x: Interval) -> Interval:
    acc = Interval(0)
    for c in reversed(_coeff_list(coeffs)):
        acc = acc * x + _coerce(c)
    return acc
