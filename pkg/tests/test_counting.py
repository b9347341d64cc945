import math
import random
from fractions import Fraction

import pytest
from hypothesis import assume, given, settings, strategies as st

from oracles import exact_value, naive_counts, naive_floor_sum
from sector_count.counting import (beatty_sum, count_rational_fast, count_sector, count_sector_brute,
                                   count_sector_fast, count_triangle_brute, count_triangle_fast, floor_sum,
                                   verify_empty)
from sector_count.errors import CeilingExceeded, FallbackImpossible, PreconditionViolated
from sector_count.exact import Surd, floor_div_sqrt
from sector_count.query import SectorQuery
from sector_count.slopes import parse_slope, quadratic, rational

SQRT2 = parse_slope("(0+1*sqrt(2))/1")
PHI = parse_slope("(1+1*sqrt(5))/2")
TINY = Fraction(1, 2**30)

slopes = st.one_of(
    st.builds(rational, st.integers(-40, 40), st.integers(1, 12)),
    st.builds(quadratic, st.integers(-6, 6), st.sampled_from([-2, -1, 1, 2]), st.integers(1, 4),
              st.sampled_from([2, 3, 5, 13])),
)
epsilons = st.builds(lambda k, j: Fraction(k, 2**j), st.integers(1, 2**12), st.integers(12, 30))


def sympy_alpha(s):
    return exact_value(s.p, 0, s.q, 1) if s.is_rational else exact_value(s.a, s.b, s.c, s.D)


def make_query(s, eps, R):
    try:
        return SectorQuery(s, eps, R)
    except ValueError:
        assume(False)


# -- examples --------------------------------------------------------------------

def test_diagonal_line():
    # the points (k, k) with 2k^2 <= 10^4
    q = SectorQuery(rational(1), TINY, 100)
    assert count_sector_brute(q).S == 70
    assert count_sector_fast(q).S == 70


def test_horizontal_line():
    q = SectorQuery(rational(0), TINY, 100)
    assert count_sector_brute(q).S == 100
    assert count_sector(q).S == 100


def test_half_slope_triangle():
    # the points (2k, k) with 5k^2 <= 10^4
    q = SectorQuery(rational(1, 2), TINY, 100)
    assert count_rational_fast(q)[0] == 44
    assert count_triangle_brute(q) == 44


def test_line_only_breakdown_has_only_d_zero():
    p, q = 3, 7
    R = 1000
    eps = Fraction(1, 2 * q * q * R)  # eps q^2 R / sqrt(58) < 1
    total, bd = count_rational_fast(SectorQuery(rational(p, q), eps, R))
    assert bd.delta_plus == bd.delta_minus == 0
    assert bd.d_min == bd.d_max == 0
    assert total == bd.delta_zero


def test_two_thirds_matches_brute():
    q = SectorQuery(rational(2, 3), Fraction(1, 50), 3000)
    assert count_rational_fast(q)[0] == count_triangle_brute(q)


def test_sqrt2_matches_brute():
    q = SectorQuery(SQRT2, Fraction(1, 100), 2000)
    fast, brute = count_sector_fast(q), count_sector_brute(q)
    assert (fast.S, fast.Delta) == (brute.S, brute.Delta)
    assert fast.method == "fast-convergent"


def test_pinned_sqrt2_values():
    # frozen from the naive oracle
    assert naive_counts(exact_value(0, 1, 1, 2), Fraction(1, 100), Fraction(50)) == (7, 7)
    q = SectorQuery(SQRT2, Fraction(1, 100), 50)
    r = count_sector_fast(q)
    assert (r.S, r.Delta) == (7, 7)


def test_pinned_sqrt2_R2000():
    # frozen from count_sector_brute, itself checked against the naive oracle at small R
    r = count_sector_fast(SectorQuery(SQRT2, Fraction(1, 100), 2000))
    assert (r.S, r.Delta) == (13333, 13328)


def test_ceiling():
    q = SectorQuery(SQRT2, Fraction(1, 100), 10**6)
    with pytest.raises(CeilingExceeded):
        count_sector_brute(q)
    with pytest.raises(CeilingExceeded):
        count_sector(q, "brute")


def test_fallback_below_ceiling_and_refusal_above():
    q = SectorQuery(rational(1, 10), Fraction(1, 5), 500)
    assert count_sector_fast(q).method == "brute"
    with pytest.raises(FallbackImpossible):
        count_sector_fast(SectorQuery(rational(1, 10), Fraction(1, 5), 10**6))


def test_rejects_wide_sector():
    with pytest.raises(ValueError):
        SectorQuery(rational(1, 2), Fraction(3, 2), 10)


def test_triangle_fast_needs_irrational():
    with pytest.raises(PreconditionViolated):
        count_triangle_fast(SectorQuery(rational(1, 2), TINY, 10))


# -- oracle equivalence ---------------------------------------------------------

@settings(max_examples=120, deadline=None)
@given(slopes, epsilons, st.integers(0, 45))
def test_brute_matches_naive_oracle(s, eps, R):
    q = make_query(s, eps, R)
    r = count_sector_brute(q)
    assert (r.S, r.Delta) == naive_counts(sympy_alpha(s), eps, Fraction(R))


@settings(max_examples=300, deadline=None)
@given(slopes, epsilons, st.integers(0, 3000), st.sampled_from(["loop", "floorsum"]))
def test_fast_matches_brute(s, eps, R, kernel):
    q = make_query(s, eps, R)
    brute = count_sector_brute(q)
    fast = count_sector_fast(q, kernel=kernel)
    assert (fast.S, fast.Delta) == (brute.S, brute.Delta)
    if fast.breakdown is not None:
        bd = fast.breakdown
        assert bd.delta_plus + bd.delta_zero + bd.delta_minus == fast.Delta
    if s.is_rational:
        assert count_rational_fast(q, kernel)[0] == brute.Delta
    else:
        assert count_triangle_fast(q, kernel=kernel)[0] == brute.Delta


@settings(max_examples=60, deadline=None)
@given(slopes, epsilons, st.integers(1, 2000).map(Fraction), st.integers(1, 7))
def test_rational_radius(s, eps, R, den):
    q = make_query(s, eps, R / den)
    brute = count_sector_brute(q)
    fast = count_sector_fast(q)
    assert (fast.S, fast.Delta) == (brute.S, brute.Delta)


# -- invariants ---------------------------------------------------------------------

@settings(max_examples=100, deadline=None)
@given(slopes, epsilons, epsilons, st.integers(0, 1500), st.integers(0, 1500))
def test_monotone_in_eps_and_R(s, e1, e2, R1, R2):
    e1, e2 = sorted((e1, e2))
    R1, R2 = sorted((R1, R2))
    a = count_sector_fast(make_query(s, e1, R1)).S
    b = count_sector_fast(make_query(s, e2, R1)).S
    c = count_sector_fast(make_query(s, e1, R2)).S
    assert a <= b and a <= c


@settings(max_examples=100, deadline=None)
@given(slopes, epsilons, st.integers(0, 3000))
def test_reflection_symmetry(s, eps, R):
    q = make_query(s, eps, R)
    assert count_sector_brute(q).S == count_sector_brute(SectorQuery(-s, eps, R)).S
    assert count_sector_fast(q).S == count_sector_fast(SectorQuery(-s, eps, R)).S


@settings(max_examples=100, deadline=None)
@given(st.integers(-30, 30), st.integers(1, 30), st.integers(1, 10**5))
def test_rational_line_only(p, q, R):
    assume(math.gcd(p, q) == 1)
    N = p * p + q * q
    # largest dyadic eps with eps q^2 R < 1 <= sqrt(N)
    eps = Fraction(1, 2 ** (q * q * R).bit_length())
    query = SectorQuery(rational(p, q), eps, R)
    # only the points (kq, kp) with k^2 N <= R^2 remain
    assert count_sector(query).S == floor_div_sqrt(R, N)


@settings(max_examples=100, deadline=None)
@given(slopes, epsilons, st.integers(10, 5000))
def test_band_width(s, eps, R):
    q = make_query(s, eps, R)
    r = count_sector_fast(q)
    assume(r.band is not None)
    M1, M2 = r.band
    assert M2 - M1 <= 3 * (eps * R + 1)


def test_sector_triangle_gap_on_random_instances():
    rng = random.Random(11)
    worst = 0.0
    for _ in range(200):
        s = rng.choice([SQRT2, PHI, rational(rng.randint(1, 40), rng.randint(1, 20))])
        eps = Fraction(rng.randint(1, 2**20), 2**24)
        R = rng.randint(10, 5000)
        q = SectorQuery(s, eps, R)
        r = count_sector_fast(q)
        worst = max(worst, abs(r.S - r.Delta) / float(1 + (R * eps) ** 2))
    assert worst <= 10


# -- floor sums ------------------------------------------------------------------------

@given(st.integers(0, 200), st.integers(1, 50), st.integers(-100, 100), st.integers(-100, 100))
def test_floor_sum_matches_naive(n, m, a, b):
    assert floor_sum(n, m, a, b) == naive_floor_sum(n, m, a, b)


@given(st.integers(0, 300), st.builds(Surd, st.integers(-50, 50), st.integers(1, 9), st.integers(1, 9),
                                       st.sampled_from([2, 3, 5, 7])))
def test_beatty_sum_matches_naive(n, x):
    assume(x.sign() > 0)
    assert beatty_sum(n, x) == sum(x.floor_times(d) for d in range(1, n + 1))


# -- emptiness ----------------------------------------------------------------------------

def test_verify_empty_quick_sector():
    grid = [10, 100, 1000, 10**4]
    report = verify_empty(SQRT2, lambda R: 1 / Fraction(R) ** 3, grid)
    assert report.passed and report.largest_nonempty_R is None


def test_verify_empty_sees_non_empty():
    report = verify_empty(SQRT2, lambda R: Fraction(1, 10), [100])
    assert not report.passed and report.largest_nonempty_R == 100
    assert len(report.rows) == 1


def test_verify_empty_threshold():
    report = verify_empty(SQRT2, lambda R: Fraction(1, 10), [100], threshold=100)
    assert report.passed


def test_verify_empty_rejects_rational():
    with pytest.raises(ValueError):
        verify_empty(rational(1, 2), lambda R: Fraction(1, 10), [100])
