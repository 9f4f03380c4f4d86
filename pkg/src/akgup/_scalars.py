"""Exact Gaussian-rational scalars (a + b i with a, b rational)."""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational


class GaussianRational:
    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = Fraction(re)
        self.im = Fraction(im)

    @classmethod
    def coerce(cls, value) -> "GaussianRational":
        if isinstance(value, GaussianRational):
            return value
        if isinstance(value, complex):
            return cls(Fraction(value.real), Fraction(value.imag))
        if isinstance(value, (int, Rational)):
            return cls(value, 0)
        if isinstance(value, float):
            return cls(Fraction(value), 0)
        raise TypeError(f"cannot coerce {value!r} to a Gaussian rational")

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __eq__(self, other):
        try:
            other = GaussianRational.coerce(other)
        except TypeError:
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __add__(self, other):
        other = GaussianRational.coerce(other)
        return GaussianRational(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        other = GaussianRational.coerce(other)
        return GaussianRational(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        return GaussianRational.coerce(other) - self

    def __mul__(self, other):
        other = GaussianRational.coerce(other)
        return GaussianRational(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = GaussianRational.coerce(other)
        den = other.re * other.re + other.im * other.im
        if not den:
            raise ZeroDivisionError("division by zero Gaussian rational")
        num = self * other.conjugate()
        return GaussianRational(num.re / den, num.im / den)

    def conjugate(self):
        return GaussianRational(self.re, -self.im)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        return f"GaussianRational({self.re}, {self.im})"

    def to_text(self) -> str:
        return f"({_frac_text(self.re)},{_frac_text(self.im)})"

    @classmethod
    def from_text(cls, text: str) -> "GaussianRational":
        body = text.strip()
        if not (body.startswith("(") and body.endswith(")")):
            raise ValueError(f"malformed Gaussian rational {text!r}")
        re_s, im_s = body[1:-1].split(",")
        return cls(Fraction(re_s), Fraction(im_s))


def _frac_text(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


I = GaussianRational(0, 1)
ONE = GaussianRational(1, 0)
ZERO = GaussianRational(0, 0)
