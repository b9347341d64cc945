"""The counting instance: slope, half-width and radius."""

from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction

from .exact import Enclosure, Surd, atan_enclosure, enclose, pi_enclosure, sign
from .slopes import SlopeValue

DEFAULT_PRECISION = 128


def default_precision() -> int:
    """Enclosure precision in bits, from SECTOR_COUNT_PRECISION if set."""
    raw = os.environ.get("SECTOR_COUNT_PRECISION")
    if not raw:
        return DEFAULT_PRECISION
    bits = int(raw)
    if bits < 16:
        raise ValueError("SECTOR_COUNT_PRECISION must be at least 16 bits")
    return bits


@dataclass(frozen=True)
class SectorQuery:
    """Count (m, n), m >= 1, with m(alpha-eps) < n < m(alpha+eps) and m^2+n^2 <= R^2."""

    alpha: SlopeValue
    epsilon: Fraction
    R: Fraction

    def __post_init__(self):
        object.__setattr__(self, "epsilon", Fraction(self.epsilon))
        object.__setattr__(self, "R", Fraction(self.R))
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.R < 0:
            raise ValueError("R must be nonnegative")
        # a sector reaching past the y-axis is outside the model
        v = self.alpha.value
        if sign(v) < 0:
            v = -v
        if sign(v + 1 - self.epsilon) <= 0:
            raise ValueError("epsilon must be < 1 + |alpha|")

    @property
    def lower_slope(self):
        return self.alpha.value - self.epsilon

    @property
    def upper_slope(self):
        return self.alpha.value + self.epsilon

    def opening_angle(self, bits: int | None = None) -> Enclosure:
        """2*theta = arctan(alpha+eps) - arctan(alpha-eps)."""
        return opening_angle(self.alpha.value, self.epsilon, bits or default_precision())

    @property
    def theta(self) -> Enclosure:
        return self.opening_angle() * Fraction(1, 2)

    @property
    def phi(self) -> Enclosure:
        bits = default_precision()
        return atan_enclosure(enclose(self.alpha.value, bits + 8), bits)


def opening_angle(alpha, eps: Fraction, bits: int) -> Enclosure:
    # arctan(a+e) - arctan(a-e) = arctan(2e / (1 + a^2 - e^2)), shifted by pi past the pole
    den = 1 + alpha * alpha - eps * eps
    s = sign(den)
    if s == 0:
        return pi_enclosure(bits) * Fraction(1, 2)
    t = (2 * eps) / den if isinstance(den, Surd) else Fraction(2 * eps) / den
    angle = atan_enclosure(enclose(t, bits + 8), bits)
    return angle + pi_enclosure(bits) if s < 0 else angle
