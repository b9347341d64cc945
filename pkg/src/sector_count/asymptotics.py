"""Closed-form predictions for sector counts and the regime table for eps = R^-lambda."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

from .errors import GapRegime
from .exact import Enclosure, Surd, enclose, floor_div_sqrt, is_square
from .query import SectorQuery, default_precision
from .slopes import RationalSlope

RATIONAL = "rational"
AlphaKind = Union[str, Fraction, int]  # "rational" or the type eta of an irrational

TARGET_RELATIVE_WIDTH = Fraction(1, 1 << 64)


def sector_area(query: SectorQuery, bits: Optional[int] = None) -> Enclosure:
    """(R^2/2) * (arctan(alpha+eps) - arctan(alpha-eps)), relative width <= 2^-64."""
    if query.R == 0:
        return Enclosure.point(0)
    bits = bits or default_precision()
    while True:
        area = query.opening_angle(bits) * (query.R * query.R / 2)
        if area.relative_width() <= TARGET_RELATIVE_WIDTH:
            return area
        bits *= 2


def main_term(query: SectorQuery, bits: Optional[int] = None):
    """eps R^2 / (1 + alpha^2): exact for rational alpha, an enclosure otherwise."""
    value = query.epsilon * query.R * query.R / (1 + query.alpha.value * query.alpha.value)
    if isinstance(value, Surd):
        return value.enclose(bits or default_precision())
    return Fraction(value)


# -- rational slopes -------------------------------------------------------------

@dataclass(frozen=True)
class RationalClosedForm:
    main: Fraction  # eps q^2 R^2 / (p^2 + q^2)
    beta: Enclosure  # {x}(1 - {x}) / q^2
    gamma: Optional[Enclosure]
    frac_arg: Enclosure  # x = eps q^2 R / sqrt(p^2 + q^2)
    floor_arg: int
    beta_exact: Union[Fraction, Surd]

    def prediction(self, eps) -> Enclosure:
        """main + beta/eps."""
        return self.beta * (1 / Fraction(eps)) + self.main


def rational_closed_form(p: int, q: int, eps, R, critical: bool = False, bits: Optional[int] = None) -> RationalClosedForm:
    """Main term, beta and (when ``critical``) gamma for alpha = p/q.

    The fractional part is taken of x = eps q^2 R / sqrt(p^2 + q^2), which is
    an element of Q(sqrt(p^2 + q^2)); its floor is exact.  If p^2 + q^2 is a
    perfect square and x is an integer, {x} = 0.
    """
    if q <= 0 or Fraction(p, q).denominator != q:
        raise ValueError("need q > 0 and gcd(p, q) = 1")
    eps, R = Fraction(eps), Fraction(R)
    bits = bits or default_precision()
    N = p * p + q * q
    main = eps * q * q * R * R / N
    scale = eps * q * q * R
    x = _over_sqrt(scale, N)
    k = floor_div_sqrt(scale, N)
    frac = x - k
    beta_exact = frac * (1 - frac) / (q * q)
    gamma = None
    if critical:
        g = scale / N + frac * (1 - frac) / scale
        gamma = enclose(g, bits)
    return RationalClosedForm(main, enclose(beta_exact, bits), gamma, enclose(x, bits), k, beta_exact)


def line_only_threshold(p: int, q: int, R) -> Enclosure:
    """eps below sqrt(p^2+q^2) / (q^2 R) leaves only the points on y = (p/q) x."""
    return enclose(_over_sqrt(Fraction(1, q * q) / Fraction(R), p * p + q * q) * (p * p + q * q), default_precision())


# -- regimes -------------------------------------------------------------------

class Regime(enum.Enum):
    SLOW = "Slow"
    MAIN = "Main"
    RATIONAL_LINE_ONLY = "RationalLineOnly"
    CRITICAL_RATIONAL = "CriticalRational"
    GAP = "Gap"
    VERY_QUICK = "VeryQuick"


@dataclass(frozen=True)
class RegimeVerdict:
    regime: Regime
    predicted_error_exponent: Optional[Fraction]
    notes: str = ""
    beta_correction: bool = False
    error_form: str = ""

    @property
    def label(self) -> str:
        return self.regime.value


def parse_alpha_kind(text: str) -> AlphaKind:
    """``rational`` or ``eta:H`` with H >= 1."""
    t = text.strip().lower()
    if t == RATIONAL:
        return RATIONAL
    if t.startswith("eta:"):
        eta = Fraction(t[4:])
        if eta < 1:
            raise ValueError("eta must be >= 1")
        return eta
    raise ValueError(f"alpha kind must be 'rational' or 'eta:H', got {text!r}")


def classify_regime(kind: AlphaKind, lam) -> RegimeVerdict:
    """Which asymptotic statement applies to eps = R^-lambda."""
    lam = Fraction(lam)
    if lam < 0:
        raise ValueError("lambda must be >= 0")
    half = Fraction(1, 2)
    if kind == RATIONAL:
        if lam <= half:
            return RegimeVerdict(Regime.SLOW, Fraction(1), "S = Area + O(R)", error_form="O(R)")
        if lam <= Fraction(2, 3):
            return RegimeVerdict(Regime.MAIN, 2 - 2 * lam, "S = Area + O(R^(2-2lambda))", error_form="O(R^2 eps^2)")
        if lam < 1:
            return RegimeVerdict(Regime.MAIN, 2 - 2 * lam, "S = Area + beta R^lambda + O(R^(2-2lambda))", True, "O(1+(R eps)^2)")
        if lam == 1:
            return RegimeVerdict(Regime.CRITICAL_RATIONAL, Fraction(0), "S = gamma R + O(1)", error_form="O(1)")
        return RegimeVerdict(Regime.RATIONAL_LINE_ONLY, Fraction(0), "S = R/sqrt(p^2+q^2) + O(1)", error_form="O(1)")
    eta = Fraction(kind)
    if eta < 1:
        raise ValueError("eta must be >= 1")
    if lam < half:
        return RegimeVerdict(Regime.SLOW, Fraction(1), "S = Area + O(R)", error_form="O(R)")
    if lam < (1 + eta) / (1 + 2 * eta):
        return RegimeVerdict(Regime.MAIN, 2 - 2 * lam, "S = Area + O(R^(2-2lambda))", error_form="O(R^2 eps^2)")
    if lam < 1 + 1 / eta:
        return RegimeVerdict(Regime.MAIN, 1 - lam / (1 + eta), "S = Area + O(R^(1-lambda/(1+eta)))",
                             error_form="O(eps^(1/(1+eta)) R)")
    if lam <= 1 + eta:
        return RegimeVerdict(Regime.GAP, None, "no asymptotic is guaranteed in this range")
    return RegimeVerdict(Regime.VERY_QUICK, None, "S = 0 for all sufficiently large R",
                         error_form="exact for R beyond an unknown R0")


@dataclass(frozen=True)
class Prediction:
    value: Enclosure
    error_form: str


def predicted_count(query: SectorQuery, verdict: RegimeVerdict, bits: Optional[int] = None) -> Prediction:
    """Leading-order prediction for S under ``verdict``; refuses in the gap."""
    r = verdict.regime
    if r is Regime.GAP:
        raise GapRegime("no prediction is available in the gap regime")
    if r is Regime.VERY_QUICK:
        return Prediction(Enclosure.point(0), verdict.error_form)
    alpha = query.alpha
    if isinstance(alpha, RationalSlope):
        p, q = alpha.p, alpha.q
        if r is Regime.RATIONAL_LINE_ONLY:
            return Prediction(enclose(_over_sqrt(query.R, p * p + q * q), bits or default_precision()), verdict.error_form)
        if r is Regime.CRITICAL_RATIONAL:
            cf = rational_closed_form(p, q, query.epsilon, query.R, critical=True, bits=bits)
            return Prediction(cf.gamma * query.R, verdict.error_form)
        if verdict.beta_correction:
            cf = rational_closed_form(p, q, query.epsilon, query.R, bits=bits)
            return Prediction(cf.prediction(query.epsilon), verdict.error_form)
    return Prediction(sector_area(query, bits), verdict.error_form)


def _over_sqrt(R, N: int):
    """R / sqrt(N) exactly, as a rational or a surd."""
    R = Fraction(R)
    if is_square(N):
        return R / math.isqrt(N)
    f = R / N
    return Surd(0, f.numerator, f.denominator, N)
