"""Exact arithmetic substrate.

Numbers of the form (a + b*sqrt(D))/c with integer a, b, c and a fixed
nonsquare D, rational enclosures, and floors that are decided by integer
square roots rather than floating point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .errors import NotRepresentable


def is_square(n: int) -> bool:
    return n >= 0 and math.isqrt(n) ** 2 == n


def floor_sqrt_int_times(b: int, D: int) -> int:
    """floor(b * sqrt(D)) for integer b and nonsquare D."""
    r = math.isqrt(b * b * D)
    return r if b >= 0 else -r - 1


class Surd:
    """Element (a + b*sqrt(D))/c of the real quadratic field Q(sqrt(D)).

    D must be a positive nonsquare.  The representation is kept with
    c > 0 and gcd(a, b, c) = 1, so it is unique for a given D.
    """

    __slots__ = ("a", "b", "c", "D")

    def __init__(self, a: int, b: int, c: int, D: int):
        if c == 0:
            raise ZeroDivisionError("zero denominator")
        if D < 2 or is_square(D):
            raise ValueError(f"D={D} must be a positive nonsquare")
        if c < 0:
            a, b, c = -a, -b, -c
        g = math.gcd(math.gcd(a, b), c)
        if g > 1:
            a, b, c = a // g, b // g, c // g
        self.a, self.b, self.c, self.D = a, b, c, D

    @classmethod
    def rational(cls, x, D: int) -> "Surd":
        x = Fraction(x)
        return cls(x.numerator, 0, x.denominator, D)

    # -- arithmetic ---------------------------------------------------------
    def _coerce(self, other) -> "Surd":
        if isinstance(other, Surd):
            if other.D != self.D:
                raise ValueError(f"mixing Q(sqrt({self.D})) and Q(sqrt({other.D}))")
            return other
        if isinstance(other, (int, Fraction)):
            return Surd.rational(other, self.D)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return Surd(self.a * o.c + o.a * self.c, self.b * o.c + o.b * self.c, self.c * o.c, self.D)

    __radd__ = __add__

    def __neg__(self):
        return Surd(-self.a, -self.b, self.c, self.D)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return Surd(
            self.a * o.a + self.b * o.b * self.D,
            self.a * o.b + self.b * o.a,
            self.c * o.c,
            self.D,
        )

    __rmul__ = __mul__

    def reciprocal(self) -> "Surd":
        # (a + b r)/c -> c (a - b r) / (a^2 - b^2 D)
        norm = self.a * self.a - self.b * self.b * self.D
        if norm == 0:
            raise ZeroDivisionError("division by zero surd")
        return Surd(self.c * self.a, -self.c * self.b, norm, self.D)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self * o.reciprocal()

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    # -- exact queries ------------------------------------------------------
    @property
    def is_rational(self) -> bool:
        return self.b == 0

    def as_fraction(self) -> Fraction:
        if self.b:
            raise ValueError("irrational surd has no rational value")
        return Fraction(self.a, self.c)

    def sign(self) -> int:
        return _sign_linear(self.a, self.b, self.D)

    def __abs__(self):
        return -self if self.sign() < 0 else self

    def compare(self, r) -> int:
        """Exact sign of self - r for rational r."""
        r = Fraction(r)
        return _sign_linear(self.a * r.denominator - self.c * r.numerator,
                            self.b * r.denominator, self.D)

    def __lt__(self, other):
        return (self - other).sign() < 0

    def __le__(self, other):
        return (self - other).sign() <= 0

    def __gt__(self, other):
        return (self - other).sign() > 0

    def __ge__(self, other):
        return (self - other).sign() >= 0

    def __eq__(self, other):
        if isinstance(other, Surd):
            return (self.a, self.b, self.c, self.D) == (other.a, other.b, other.c, other.D) or (
                self.b == other.b == 0 and self.a * other.c == other.a * self.c)
        if isinstance(other, (int, Fraction)):
            return self.b == 0 and Fraction(self.a, self.c) == other
        return NotImplemented

    def __hash__(self):
        if self.b == 0:
            return hash(Fraction(self.a, self.c))
        return hash((self.a, self.b, self.c, self.D))

    def __floor__(self) -> int:
        # floor((a + y)/c) == floor((a + floor(y))/c) for integer a and c > 0
        if self.b == 0:
            return self.a // self.c
        return (self.a + floor_sqrt_int_times(self.b, self.D)) // self.c

    def floor_times(self, m: int) -> int:
        """floor(m * self) without building the product."""
        if self.b == 0:
            return (m * self.a) // self.c
        return (m * self.a + floor_sqrt_int_times(m * self.b, self.D)) // self.c

    def enclose(self, bits: int = 128) -> "Enclosure":
        """Rational enclosure with relative width at most about 2**-bits."""
        if self.b == 0:
            return Enclosure.point(self.as_fraction())
        k = bits
        while True:
            f = self.floor_times(1 << k)
            if abs(f) >= (1 << bits):
                return Enclosure(Fraction(f, 1 << k), Fraction(f + 1, 1 << k))
            k += bits - abs(f).bit_length() + 1

    def __float__(self) -> float:
        return float(self.enclose(64).lo)

    def __repr__(self):
        return f"Surd({self.a}, {self.b}, {self.c}, {self.D})"

    def __str__(self):
        if self.b == 0:
            return str(Fraction(self.a, self.c))
        op = "+" if self.b > 0 else "-"
        return f"({self.a}{op}{abs(self.b)}*sqrt({self.D}))/{self.c}"


def _sign_linear(u: int, v: int, D: int) -> int:
    """Sign of u + v*sqrt(D) for integers u, v and nonsquare D."""
    if v == 0:
        return (u > 0) - (u < 0)
    if u == 0:
        return 1 if v > 0 else -1
    if (u > 0) == (v > 0):
        return 1 if u > 0 else -1
    diff = u * u - v * v * D  # nonzero because D is nonsquare
    if u > 0:
        return 1 if diff > 0 else -1
    return -1 if diff > 0 else 1


Number = Union[int, Fraction, Surd]


@dataclass(frozen=True)
class Enclosure:
    """Closed interval [lo, hi] with rational endpoints."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"empty enclosure [{self.lo}, {self.hi}]")

    @classmethod
    def point(cls, x) -> "Enclosure":
        x = Fraction(x)
        return cls(x, x)

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def contains(self, x) -> bool:
        if isinstance(x, Surd):
            return x.compare(self.lo) >= 0 and x.compare(self.hi) <= 0
        return self.lo <= x <= self.hi

    def excludes_zero(self) -> bool:
        return self.lo > 0 or self.hi < 0

    def relative_width(self) -> Fraction:
        m = min(abs(self.lo), abs(self.hi))
        if m == 0:
            return Fraction(0) if self.width == 0 else Fraction(10**9)
        return self.width / m

    def __add__(self, other):
        if isinstance(other, Enclosure):
            return Enclosure(self.lo + other.lo, self.hi + other.hi)
        o = Fraction(other)
        return Enclosure(self.lo + o, self.hi + o)

    __radd__ = __add__

    def __neg__(self):
        return Enclosure(-self.hi, -self.lo)

    def __sub__(self, other):
        return self + (-other if isinstance(other, Enclosure) else -Fraction(other))

    def __mul__(self, other):
        if isinstance(other, Enclosure):
            ps = (self.lo * other.lo, self.lo * other.hi, self.hi * other.lo, self.hi * other.hi)
            return Enclosure(min(ps), max(ps))
        o = Fraction(other)
        return Enclosure(min(self.lo * o, self.hi * o), max(self.lo * o, self.hi * o))

    __rmul__ = __mul__

    def rounded(self, bits: int) -> "Enclosure":
        """Outward-round both ends to multiples of 2**-bits."""
        s = 1 << bits
        return Enclosure(Fraction(math.floor(self.lo * s), s), Fraction(math.ceil(self.hi * s), s))

    def __str__(self):
        return f"[{float(self.lo):.17g}, {float(self.hi):.17g}]"


def enclose(x: Number, bits: int = 128) -> Enclosure:
    if isinstance(x, Surd):
        return x.enclose(bits)
    return Enclosure.point(x)


def sign(x: Number) -> int:
    if isinstance(x, Surd):
        return x.sign()
    return (x > 0) - (x < 0)


def floor_certified(x: Number) -> int:
    """Exact floor of a rational or of an element of Q(sqrt(D))."""
    if isinstance(x, (int, Fraction, Surd)):
        return math.floor(x)
    raise NotRepresentable(f"cannot take a certified floor of {type(x).__name__}")


def floor_sqrt(y: Number) -> int:
    """floor(sqrt(y)) for y >= 0; for integer k, k*k <= y iff k*k <= floor(y)."""
    if sign(y) < 0:
        raise ValueError("square root of a negative number")
    return math.isqrt(floor_certified(y))


def floor_div_sqrt(R: Number, y: Number) -> int:
    """floor(R / sqrt(y)) for R >= 0 and y > 0."""
    if sign(y) <= 0 or sign(R) < 0:
        raise ValueError("need R >= 0 and y > 0")
    R = R if isinstance(R, Surd) else Fraction(R)
    return floor_sqrt(R * R / y)


# -- certified arctangent ------------------------------------------------------

def _atan_bracket(t: Fraction, bits: int) -> Enclosure:
    """Certified arctan(t) for a rational t."""
    if t < 0:
        return -_atan_bracket(-t, bits)
    if t <= Fraction(1, 3):
        return _atan_series_exact(t, bits)
    if t <= 3:
        # arctan t = pi/4 + arctan((t-1)/(t+1)), |(t-1)/(t+1)| <= 1/2
        return pi_enclosure(bits) * Fraction(1, 4) + _atan_series_exact((t - 1) / (t + 1), bits)
    return pi_enclosure(bits) * Fraction(1, 2) - _atan_series_exact(1 / t, bits)


def _atan_series_exact(t: Fraction, bits: int) -> Enclosure:
    """arctan(t), |t| <= 1/2, with dyadic rounding of the running sum tracked."""
    if t == 0:
        return Enclosure.point(0)
    scale = bits + 8 + max(0, -_log2_floor(abs(t)))
    unit = Fraction(1, 1 << (scale + 8))
    t2 = t * t
    power = t
    total = Fraction(0)
    slack = Fraction(0)
    k = 0
    stop = Fraction(1, 1 << scale)
    while True:
        total += power / (2 * k + 1)
        k += 1
        power = -power * t2
        # keep operands small: round power and total, account for the error
        rp = Fraction(round(power / unit)) * unit
        slack += abs(rp - power) * 2  # a perturbed power affects at most two terms' worth
        power = rp
        rt = Fraction(round(total / unit)) * unit
        slack += abs(rt - total)
        total = rt
        nxt = abs(power) / (2 * k + 1)
        if nxt <= stop:
            tail = nxt + 2 * slack
            return Enclosure(total - tail, total + tail)


def _log2_floor(x: Fraction) -> int:
    return x.numerator.bit_length() - x.denominator.bit_length() - 1


_PI_CACHE: dict[int, Enclosure] = {}


def pi_enclosure(bits: int = 128) -> Enclosure:
    """pi/4 = 4 arctan(1/5) - arctan(1/239)."""
    if bits not in _PI_CACHE:
        e = _atan_series_exact(Fraction(1, 5), bits + 8) * 16 - _atan_series_exact(Fraction(1, 239), bits + 8) * 4
        _PI_CACHE[bits] = e
    return _PI_CACHE[bits]


def atan_enclosure(t: Enclosure, bits: int = 128) -> Enclosure:
    """Enclosure of arctan over an interval argument (arctan is increasing)."""
    return Enclosure(_atan_bracket(t.lo, bits).lo, _atan_bracket(t.hi, bits).hi)
