"""Exact lattice-point counters for thin sectors and triangles.

Brute-force counters walk m = 1..floor(R) and are the reference oracle.
The fast counters partition the triangle count by d = n*q - m*p for a
rational p/q close to alpha; within each class d the admissible m form an
arithmetic progression modulo q, so every class costs two floors.  The
per-class counts are either summed directly or, for wide d-windows,
collapsed with floor sums.  Near the arc, a short band of m is enumerated
with the disk constraint.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Optional

from .errors import (
    CeilingExceeded,
    FallbackImpossible,
    NoAdmissibleConvergent,
    PreconditionViolated,
)
from .exact import Surd, floor_div_sqrt, sign
from .query import SectorQuery
from .slopes import (
    Convergent,
    RationalSlope,
    _certify_delta,
    is_admissible,
    iter_convergent_pairs,
)

log = logging.getLogger(__name__)

DEFAULT_CEILING = 10**5
# d-windows at most this wide are summed class by class
LOOP_WINDOW = 256


@dataclass(frozen=True)
class PartitionBreakdown:
    d_min: int
    d_max: int
    delta_plus: int
    delta_zero: int
    delta_minus: int
    q_used: int
    p_bar: int
    M: int  # largest m counted

    @property
    def total(self) -> int:
        return self.delta_plus + self.delta_zero + self.delta_minus


@dataclass(frozen=True)
class CountReport:
    S: int
    Delta: int
    breakdown: Optional[PartitionBreakdown]
    band_correction: int  # S - Delta
    method: str  # "brute", "fast-convergent" or "fast-rational"
    timing: float  # seconds
    band: Optional[tuple[int, int]] = None  # (M1, M2): m in (M1, M2] checked against the disk
    convergent: Optional[Convergent] = None


# -- exact floors of multiples ---------------------------------------------------

def _floor_multiples(x) -> Callable[[int], int]:
    """m -> floor(m * x) for a rational or surd x."""
    if isinstance(x, Surd):
        return x.floor_times
    x = Fraction(x)
    num, den = x.numerator, x.denominator
    return lambda m: (m * num) // den


def _floor_sqrt_disk(R: Fraction) -> Callable[[int], int]:
    """m -> floor(sqrt(R^2 - m^2)) for 0 <= m <= R."""
    rn, rd = R.numerator, R.denominator
    rn2, rd2 = rn * rn, rd * rd
    return lambda m: math.isqrt(rn2 - m * m * rd2) // rd


def _n_range(query: SectorQuery):
    """Functions giving the first and last n strictly inside the slope interval at m."""
    lo = _floor_multiples(query.lower_slope)
    neg_hi = _floor_multiples(-query.upper_slope)
    return (lambda m: lo(m) + 1), (lambda m: -neg_hi(m) - 1)


def triangle_cutoff(alpha, R) -> int:
    """floor(R / sqrt(1 + alpha^2))."""
    return floor_div_sqrt(Fraction(R), 1 + alpha * alpha)


# -- brute force -----------------------------------------------------------------

def count_sector_brute(query: SectorQuery, ceiling: int = DEFAULT_CEILING) -> CountReport:
    if query.R > ceiling:
        raise CeilingExceeded(f"R = {query.R} exceeds the brute ceiling {ceiling}")
    t0 = time.perf_counter()
    first, last = _n_range(query)
    disk = _floor_sqrt_disk(query.R)
    S = 0
    for m in range(1, math.floor(query.R) + 1):
        r = disk(m)
        k = min(last(m), r) - max(first(m), -r) + 1
        if k > 0:
            S += k
    Delta = count_triangle_brute(query, ceiling)
    return CountReport(S, Delta, None, S - Delta, "brute", time.perf_counter() - t0)


def count_triangle_brute(query: SectorQuery, ceiling: int = DEFAULT_CEILING) -> int:
    if query.R > ceiling:
        raise CeilingExceeded(f"R = {query.R} exceeds the brute ceiling {ceiling}")
    first, last = _n_range(query)
    total = 0
    for m in range(1, triangle_cutoff(query.alpha.value, query.R) + 1):
        k = last(m) - first(m) + 1
        if k > 0:
            total += k
    return total


# -- floor sums --------------------------------------------------------------------

def floor_sum(n: int, m: int, a: int, b: int) -> int:
    """sum_{i=0}^{n-1} floor((a*i + b) / m) for m > 0, in O(log) steps."""
    if n <= 0:
        return 0
    ans = 0
    if a < 0 or a >= m:
        ans += n * (n - 1) // 2 * (a // m)
        a %= m
    if b < 0 or b >= m:
        ans += n * (b // m)
        b %= m
    while True:
        if a >= m:
            ans += n * (n - 1) // 2 * (a // m)
            a %= m
        if b >= m:
            ans += n * (b // m)
            b %= m
        y_max = a * n + b
        if y_max < m:
            return ans
        n, b = divmod(y_max, m)
        m, a = a, m


def beatty_sum(n: int, x: Surd) -> int:
    """sum_{d=1}^{n} floor(d*x) for irrational x.

    For 0 < x < 1 the points under the line y = d*x satisfy
    sum floor(d x) = n*N - sum_{j<=N} floor(j/x) with N = floor(n x),
    which recurses on 1/x like a continued fraction.
    """
    total = 0
    sgn = 1
    while n > 0:
        k = math.floor(x)
        x = x - k
        N = x.floor_times(n)
        total += sgn * (k * n * (n + 1) // 2 + n * N)
        sgn = -sgn
        n = N
        if n:
            x = x.reciprocal()
    return total


# -- d-partition kernels -----------------------------------------------------------

def _ap_count(M: int, L: int, r: int, q: int) -> int:
    """#{m : L < m <= M, m = r mod q}."""
    return (M - r) // q - (L - r) // q


def _rational_cone(p: int, q: int, eps: Fraction, M: int, kernel: str = "auto") -> PartitionBreakdown:
    """Points with 1 <= m <= M and |n q - m p| < m q eps, for alpha = p/q."""
    u, v = eps.numerator, eps.denominator
    p_bar = pow(p, -1, q) if q > 1 else 0
    # |d| < m q eps <= M q eps;  for d != 0 need m > |d| v / (q u)
    E = max(0, (M * q * u - 1) // v) if M > 0 else 0
    zero = M // q
    if kernel == "loop" or (kernel == "auto" and E <= LOOP_WINDOW):
        plus = minus = 0
        for e in range(1, E + 1):
            L = (e * v) // (q * u)
            plus += _ap_count(M, L, (-e * p_bar) % q, q)
            minus += _ap_count(M, L, (e * p_bar) % q, q)
    else:
        # floor((M - r)/q) - floor((L - r)/q) with r = -d p_bar mod q telescopes to
        # floor((M + d p_bar)/q) - floor((L + d p_bar)/q), and L + d p_bar folds into one floor
        qqu = q * q * u
        plus = floor_sum(E, q, p_bar, M + p_bar) - floor_sum(E, qqu, v + q * u * p_bar, v + q * u * p_bar)
        minus = floor_sum(E, q, -p_bar, M - p_bar) - floor_sum(E, qqu, v - q * u * p_bar, v - q * u * p_bar)
    return PartitionBreakdown(-E, E, plus, zero, minus, q, p_bar, M)


def _irrational_cone(alpha: Surd, eps: Fraction, p: int, q: int, M: int, kernel: str = "auto") -> PartitionBreakdown:
    """Points with 1 <= m <= M and m(alpha-eps) < n < m(alpha+eps), via a rational p/q
    with |alpha - p/q| < eps/2."""
    p_bar = pow(p, -1, q) if q > 1 else 0
    s_plus = alpha * q + (eps * q - p)  # (eps + delta) q
    s_minus = (eps * q + p) - alpha * q  # (eps - delta) q
    if s_plus.sign() <= 0 or s_minus.sign() <= 0:
        raise PreconditionViolated("convergent does not satisfy |delta| < eps")
    # both products are irrational, so floors give the strict bounds
    E_plus = s_plus.floor_times(M)
    E_minus = s_minus.floor_times(M)
    k_plus = s_plus.reciprocal()
    k_minus = s_minus.reciprocal()
    zero = M // q
    if kernel == "loop" or (kernel == "auto" and E_plus + E_minus <= 2 * LOOP_WINDOW):
        plus = sum(_ap_count(M, k_plus.floor_times(e), (-e * p_bar) % q, q) for e in range(1, E_plus + 1))
        minus = sum(_ap_count(M, k_minus.floor_times(e), (e * p_bar) % q, q) for e in range(1, E_minus + 1))
    else:
        plus = floor_sum(E_plus, q, p_bar, M + p_bar) - beatty_sum(E_plus, (k_plus + p_bar) / q)
        minus = floor_sum(E_minus, q, -p_bar, M - p_bar) - beatty_sum(E_minus, (k_minus - p_bar) / q)
    return PartitionBreakdown(-E_minus, E_plus, plus, zero, minus, q, p_bar, M)


def _first_admissible(alpha, eps: Fraction) -> Convergent:
    pairs = iter_convergent_pairs(alpha)
    prev = next(pairs)
    for i, nxt in enumerate(pairs):
        if is_admissible(alpha, prev[0], prev[1], eps):
            return _certify_delta(alpha, i, prev[0], prev[1], nxt[1])
        prev = nxt
    raise NoAdmissibleConvergent(f"{alpha} has no convergent within {eps}/2")  # rational input only


def count_triangle_fast(query: SectorQuery, conv: Optional[Convergent] = None, kernel: str = "auto"):
    """Triangle count for irrational alpha through the d-partition.

    Returns (count, PartitionBreakdown).
    """
    alpha = query.alpha
    if alpha.is_rational:
        raise PreconditionViolated("count_triangle_fast needs an irrational slope")
    if conv is None:
        conv = _first_admissible(alpha, query.epsilon)
    elif not is_admissible(alpha, conv.p, conv.q, query.epsilon):
        raise PreconditionViolated(f"|alpha - {conv.p}/{conv.q}| >= eps/2")
    M = triangle_cutoff(alpha.value, query.R)
    bd = _irrational_cone(alpha.value, query.epsilon, conv.p, conv.q, M, kernel)
    return bd.total, bd


def count_rational_fast(query: SectorQuery, kernel: str = "auto"):
    """Triangle count for rational alpha = p/q through the d-partition.

    Returns (count, PartitionBreakdown).  When eps q^2 R / sqrt(p^2+q^2) < 1
    only the class d = 0 is populated.
    """
    alpha = query.alpha
    if not isinstance(alpha, RationalSlope):
        raise PreconditionViolated("count_rational_fast needs a rational slope")
    p, q = alpha.p, alpha.q
    M = floor_div_sqrt(q * query.R, p * p + q * q)
    bd = _rational_cone(p, q, query.epsilon, M, kernel)
    return bd.total, bd


def count_sector_fast(query: SectorQuery, ceiling: int = DEFAULT_CEILING, kernel: str = "auto") -> CountReport:
    """Exact sector count: d-partition below the arc, enumeration across it.

    For m <= M1 = floor(R / sqrt(1 + (alpha+eps)^2)) every point of the slope
    interval lies inside the disk; for m > M2 = floor(R / sqrt(1 + (alpha-eps)^2))
    none does.  Only M1 < m <= M2 needs the disk test.  Requires
    alpha - eps > 0 after reflecting alpha to |alpha|; otherwise falls back
    to brute force below the ceiling.
    """
    t0 = time.perf_counter()
    if sign(query.alpha.value) < 0:
        # (m, n) -> (m, -n) maps the sector about -alpha onto the one about alpha
        query = SectorQuery(-query.alpha, query.epsilon, query.R)
    alpha = query.alpha
    value = alpha.value
    eps = query.epsilon
    lower = query.lower_slope
    if sign(lower) <= 0:
        if query.R <= ceiling:
            log.debug("alpha - eps <= 0; falling back to brute force")
            return count_sector_brute(query, ceiling)
        raise FallbackImpossible(f"alpha - eps <= 0 and R = {query.R} exceeds the brute ceiling")
    R = query.R
    upper = query.upper_slope
    M1 = floor_div_sqrt(R, 1 + upper * upper)
    M2 = floor_div_sqrt(R, 1 + lower * lower)
    M = triangle_cutoff(value, R)

    conv = None
    if isinstance(alpha, RationalSlope):
        core = _rational_cone(alpha.p, alpha.q, eps, M1, kernel)
        full = _rational_cone(alpha.p, alpha.q, eps, M, kernel)
        method = "fast-rational"
    else:
        conv = _first_admissible(alpha, eps)
        core = _irrational_cone(value, eps, conv.p, conv.q, M1, kernel)
        full = _irrational_cone(value, eps, conv.p, conv.q, M, kernel)
        method = "fast-convergent"

    first, last = _n_range(query)
    disk = _floor_sqrt_disk(R)
    band = 0
    for m in range(M1 + 1, M2 + 1):
        k = min(last(m), disk(m)) - first(m) + 1
        if k > 0:
            band += k
    S = core.total + band
    return CountReport(S, full.total, full, S - full.total, method, time.perf_counter() - t0, (M1, M2), conv)


def count_sector(query: SectorQuery, method: str = "auto", ceiling: int = DEFAULT_CEILING) -> CountReport:
    """Dispatch on method: "brute", "fast" or "auto" (fast, falling back below the ceiling)."""
    if method == "brute":
        return count_sector_brute(query, ceiling)
    if method in ("fast", "auto"):
        return count_sector_fast(query, ceiling)
    raise ValueError(f"unknown method {method!r}")


# -- emptiness ---------------------------------------------------------------------

@dataclass(frozen=True)
class EmptinessReport:
    rows: list  # (R, eps, S)
    largest_nonempty_R: Optional[Fraction]
    threshold: Optional[Fraction]
    passed: bool  # every grid R above the threshold is empty


def verify_empty(
    alpha,
    eps_schedule: Callable[[Fraction], Fraction],
    R_values: Iterable,
    threshold=None,
    ceiling: int = DEFAULT_CEILING,
) -> EmptinessReport:
    """Count every grid radius and report the largest one with S > 0.

    With ``threshold`` set, the check passes iff no R above it is non-empty;
    without one, every grid radius must be empty.
    """
    if alpha.is_rational:
        raise ValueError("emptiness is a statement about irrational slopes")
    rows = []
    last_nonempty = None
    for R in R_values:
        R = Fraction(R)
        eps = Fraction(eps_schedule(R))
        S = count_sector_fast(SectorQuery(alpha, eps, R), ceiling).S
        rows.append((R, eps, S))
        if S > 0:
            last_nonempty = R
    if threshold is None:
        passed = last_nonempty is None
    else:
        passed = last_nonempty is None or last_nonempty <= Fraction(threshold)
    return EmptinessReport(rows, last_nonempty, None if threshold is None else Fraction(threshold), passed)


__all__ = [
    "CountReport",
    "EmptinessReport",
    "PartitionBreakdown",
    "SectorQuery",
    "beatty_sum",
    "count_rational_fast",
    "count_sector",
    "count_sector_brute",
    "count_sector_fast",
    "count_triangle_brute",
    "count_triangle_fast",
    "floor_sum",
    "triangle_cutoff",
    "verify_empty",
]
