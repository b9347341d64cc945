"""Exact slopes and their continued fractions.

A slope is either a reduced rational p/q or a quadratic irrational
(a + b*sqrt(D))/c.  Both admit exact comparison with rationals, which is
what every strict inequality in the counters relies on.
"""

from __future__ import annotations

import enum
import itertools
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Optional, Union

import numpy as np

from .errors import NoAdmissibleConvergent, PreconditionViolated, RationalExhausted
from .exact import Enclosure, Surd, is_square


@dataclass(frozen=True)
class RationalSlope:
    p: int
    q: int

    def __post_init__(self):
        if self.q <= 0 or math.gcd(self.p, self.q) != 1:
            raise ValueError(f"{self.p}/{self.q} is not in lowest terms with q > 0")

    @property
    def value(self) -> Fraction:
        return Fraction(self.p, self.q)

    @property
    def is_rational(self) -> bool:
        return True

    def __neg__(self):
        return RationalSlope(-self.p, self.q)

    def __str__(self):
        return f"{self.p}/{self.q}"


@dataclass(frozen=True)
class QuadraticSlope:
    """(a + b*sqrt(D))/c with c > 0, gcd(a, b, c) = 1 and D squarefree."""

    a: int
    b: int
    c: int
    D: int

    def __post_init__(self):
        if self.b == 0 or self.c <= 0 or self.D < 2 or is_square(self.D):
            raise ValueError("need b != 0, c > 0 and nonsquare D >= 2")
        if math.gcd(math.gcd(self.a, self.b), self.c) != 1 or _square_part(self.D) != 1:
            raise ValueError("not in canonical form; use quadratic()")

    @property
    def value(self) -> Surd:
        return Surd(self.a, self.b, self.c, self.D)

    @property
    def is_rational(self) -> bool:
        return False

    def __neg__(self):
        return QuadraticSlope(-self.a, -self.b, self.c, self.D)

    def __str__(self):
        op = "+" if self.b > 0 else "-"
        return f"({self.a}{op}{abs(self.b)}*sqrt({self.D}))/{self.c}"


SlopeValue = Union[RationalSlope, QuadraticSlope]


def _square_part(D: int) -> int:
    """Largest k with k*k dividing D (trial division)."""
    k = 1
    f = 2
    while f * f <= D:
        while D % (f * f) == 0:
            D //= f * f
            k *= f
        f += 1 if f == 2 else 2
    return k


def rational(p: int, q: int = 1) -> RationalSlope:
    if q == 0:
        raise ZeroDivisionError("q = 0")
    x = Fraction(p, q)
    return RationalSlope(x.numerator, x.denominator)


def quadratic(a: int, b: int, c: int, D: int) -> SlopeValue:
    """Canonical slope for (a + b*sqrt(D))/c; rational if the root vanishes."""
    if c == 0:
        raise ZeroDivisionError("c = 0")
    if D < 0:
        raise ValueError("D must be nonnegative")
    k = math.isqrt(D)
    if b == 0 or k * k == D:
        return rational(a + b * k, c)
    s = _square_part(D)
    b, D = b * s, D // (s * s)
    if c < 0:
        a, b, c = -a, -b, -c
    g = math.gcd(math.gcd(a, b), c)
    return QuadraticSlope(a // g, b // g, c // g, D)


def slope_from_value(x) -> SlopeValue:
    if isinstance(x, Surd):
        return quadratic(x.a, x.b, x.c, x.D)
    x = Fraction(x)
    return RationalSlope(x.numerator, x.denominator)


_RAT_RE = re.compile(r"^([+-]?\d+)(?:/(\d+))?$")
_QUAD_RE = re.compile(r"^\(([+-]?\d+)([+-])(\d+)\*sqrt\((\d+)\)\)(?:/(\d+))?$")


def parse_slope(text: str) -> SlopeValue:
    """Parse ``p/q`` or ``(a+b*sqrt(D))/c``; whitespace is ignored."""
    s = re.sub(r"\s+", "", text)
    m = _RAT_RE.match(s)
    if m:
        return rational(int(m.group(1)), int(m.group(2) or 1))
    m = _QUAD_RE.match(s)
    if m:
        b = int(m.group(3)) * (-1 if m.group(2) == "-" else 1)
        return quadratic(int(m.group(1)), b, int(m.group(5) or 1), int(m.group(4)))
    raise ValueError(f"cannot parse slope {text!r}; expected p/q or (a+b*sqrt(D))/c")


def compare_to_rational(s: SlopeValue, r) -> int:
    """Exact three-way comparison: -1, 0 or 1 as s <, ==, > r.

    Never returns 0 for a quadratic irrational.
    """
    r = Fraction(r)
    if isinstance(s, RationalSlope):
        v = s.value
        return (v > r) - (v < r)
    return s.value.compare(r)


# -- continued fractions -------------------------------------------------------

def iter_partial_quotients(s: SlopeValue) -> Iterator[int]:
    if isinstance(s, RationalSlope):
        p, q = s.p, s.q
        while q:
            a, r = divmod(p, q)
            yield a
            p, q = q, r
        return
    # write the number as (P + sqrt(N))/Q with Q | N - P^2, then run the surd recurrence
    if s.b > 0:
        P, N, Q = s.a, s.b * s.b * s.D, s.c
    else:
        P, N, Q = -s.a, s.b * s.b * s.D, -s.c
    if (N - P * P) % Q:
        P, N, Q = P * abs(Q), N * Q * Q, Q * abs(Q)
    r = math.isqrt(N)
    while True:
        a = (P + r) // Q if Q > 0 else (-P - r - 1) // (-Q)
        yield a
        P = a * Q - P
        Q = (N - P * P) // Q


def cf_expand(s: SlopeValue, k: int) -> list[int]:
    """Partial quotients [a_0; a_1, ..., a_k].

    Raises RationalExhausted (carrying the full expansion) when a rational
    slope has fewer than k + 1 quotients.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    quotients = list(itertools.islice(iter_partial_quotients(s), k + 1))
    if len(quotients) < k + 1:
        raise RationalExhausted(f"{s} has only {len(quotients)} partial quotients", quotients)
    return quotients


def cf_fold(quotients: list[int]) -> Fraction:
    x = Fraction(quotients[-1])
    for a in reversed(quotients[:-1]):
        x = a + 1 / x
    return x


def iter_convergent_pairs(s: SlopeValue) -> Iterator[tuple[int, int]]:
    p0, q0, p1, q1 = 1, 0, 0, 1
    for a in iter_partial_quotients(s):
        p0, q0, p1, q1 = a * p0 + p1, a * q0 + q1, p0, q0
        yield p0, q0


@dataclass(frozen=True)
class Convergent:
    index: int
    p: int
    q: int
    delta_sign: int
    delta_bound: Enclosure  # encloses alpha - p/q

    def __str__(self):
        return f"{self.p}/{self.q}"


def delta(s: SlopeValue, p: int, q: int):
    """alpha - p/q, exactly."""
    return s.value - Fraction(p, q)


def _certify_delta(s: SlopeValue, index: int, p: int, q: int, q_next: Optional[int]) -> Convergent:
    d = delta(s, p, q)
    if isinstance(d, Fraction):
        return Convergent(index, p, q, (d > 0) - (d < 0), Enclosure.point(d))
    # dyadic refinement until the cell has width <= 1/(q q_next) and excludes 0
    j = max(1, (q * (q_next or q)).bit_length())
    while True:
        f = d.floor_times(1 << j)
        if f not in (-1, 0):
            break
        j += 8
    return Convergent(index, p, q, 1 if f >= 0 else -1, Enclosure(Fraction(f, 1 << j), Fraction(f + 1, 1 << j)))


def convergents(s: SlopeValue, k: int) -> list[Convergent]:
    """Convergents p_0/q_0 .. p_k/q_k with certified enclosures of alpha - p_i/q_i.

    Raises RationalExhausted (carrying the full list) when a rational
    slope has fewer than k + 1 convergents.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    pairs = list(itertools.islice(iter_convergent_pairs(s), k + 2))
    out = []
    for i, (p, q) in enumerate(pairs[: k + 1]):
        q_next = pairs[i + 1][1] if i + 1 < len(pairs) else None
        out.append(_certify_delta(s, i, p, q, q_next))
    if len(out) < k + 1:
        raise RationalExhausted(f"{s} has only {len(out)} convergents", out)
    return out


# -- convergent selection ------------------------------------------------------

class SelectionMode(enum.Enum):
    FIRST_ADMISSIBLE = "first"
    ERROR_OPTIMAL = "optimal"


@dataclass(frozen=True)
class ConvergentSelection:
    chosen: Convergent
    X: Fraction
    mode: SelectionMode
    eta_used: Fraction
    epsilon: Fraction
    # existential constants of the type bound; never computed
    c_alpha: Optional[Fraction] = None
    C_const: Optional[Fraction] = None


def is_admissible(s: SlopeValue, p: int, q: int, eps) -> bool:
    """|alpha - p/q| < eps/2, decided exactly."""
    half = Fraction(eps) / 2
    c = Fraction(p, q)
    return compare_to_rational(s, c - half) > 0 and compare_to_rational(s, c + half) < 0


def concrete_error(q: int, eps, R) -> Fraction:
    eps, R = Fraction(eps), Fraction(R)
    return R / q + 1 / (eps * q * q) + eps * q * R


def select_convergent(
    s: SlopeValue,
    eps,
    mode: SelectionMode = SelectionMode.FIRST_ADMISSIBLE,
    R=None,
    eta=1,
) -> ConvergentSelection:
    """Pick a convergent p/q with |alpha - p/q| < eps/2.

    FIRST_ADMISSIBLE returns the first such convergent (smallest q).
    ERROR_OPTIMAL returns, among admissible convergents with q < R, the
    one minimising R/q + 1/(eps q^2) + eps q R.  When R is given, a
    choice with q >= R raises NoAdmissibleConvergent.
    """
    eps = Fraction(eps)
    eta = Fraction(eta)
    if s.is_rational:
        raise PreconditionViolated("convergent selection is defined for irrational slopes")
    if not 0 < eps < 1:
        raise ValueError("need 0 < eps < 1")
    if eta < 1:
        raise ValueError("eta must be >= 1")
    if mode is SelectionMode.ERROR_OPTIMAL and R is None:
        raise ValueError("error-optimal selection needs R")

    pairs = iter_convergent_pairs(s)
    prev = next(pairs)
    best = None
    for i, nxt in enumerate(pairs):
        p, q = prev
        if R is not None and q >= R:
            break
        if is_admissible(s, p, q, eps):
            if mode is SelectionMode.FIRST_ADMISSIBLE:
                best = (i, p, q, nxt[1])
                break
            cost = concrete_error(q, eps, R)
            if best is None or cost < best[4]:
                best = (i, p, q, nxt[1], cost)
        prev = nxt
    if best is None:
        raise NoAdmissibleConvergent(f"no convergent of {s} with q < {R} has |delta| < {eps}/2")
    i, p, q, q_next = best[:4]
    conv = _certify_delta(s, i, p, q, q_next)
    return ConvergentSelection(conv, Fraction(q_next - 1), mode, eta, eps)


# -- type estimation -----------------------------------------------------------

@dataclass(frozen=True)
class TypeEstimate:
    eta_hat: Fraction
    depth: int
    per_step: list = field(default_factory=list)


def estimate_type(s: SlopeValue, depth: int = 20) -> TypeEstimate:
    """Heuristic estimate of the irrationality type from convergent growth.

    Fits log q_{i+1} against log q_i over the upper half of the first
    ``depth`` convergents; the slope is the exponent in q_{i+1} <~ q_i^eta
    with the multiplicative constant absorbed by the intercept.
    """
    if s.is_rational:
        raise PreconditionViolated("the type is defined only for irrational slopes")
    if depth < 3:
        raise ValueError("depth must be >= 3")
    qs = [q for _, q in itertools.islice(iter_convergent_pairs(s), depth + 2)]
    steps = [(math.log(qs[i]), math.log(qs[i + 1])) for i in range(depth + 1) if qs[i] >= 2]
    per_step = [b / a for a, b in steps]
    window = steps[len(steps) // 2:]
    if len(window) < 2:
        window = steps
    x = np.array([a for a, _ in window])
    y = np.array([b for _, b in window])
    slope = float(np.polyfit(x, y, 1)[0]) if len(window) >= 2 else per_step[-1]
    # every irrational has type >= 1; lower fits are finite-window bias from uneven quotients
    return TypeEstimate(max(Fraction(1), Fraction(slope).limit_denominator(10**6)), depth, per_step)
