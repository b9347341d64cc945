"""Exact lattice-point counts in thin circular sectors about the line y = alpha x."""

from .asymptotics import (Regime, RegimeVerdict, classify_regime, main_term, predicted_count, rational_closed_form,
                          sector_area)
from .counting import (CountReport, PartitionBreakdown, count_rational_fast, count_sector, count_sector_brute,
                       count_sector_fast, count_triangle_brute, count_triangle_fast, verify_empty)
from .errors import SectorCountError
from .exact import Enclosure, Surd, floor_certified
from .harness import SweepConfig, check_bound, fit_error_exponent, run_sweep
from .query import SectorQuery
from .slopes import (QuadraticSlope, RationalSlope, SelectionMode, cf_expand, convergents, estimate_type,
                     parse_slope, quadratic, rational, select_convergent)

__version__ = "0.1.0"

__all__ = [
    "CountReport", "Enclosure", "PartitionBreakdown", "QuadraticSlope", "RationalSlope", "Regime",
    "RegimeVerdict", "SectorCountError", "SectorQuery", "SelectionMode", "Surd", "SweepConfig", "cf_expand",
    "check_bound", "classify_regime", "convergents", "count_rational_fast", "count_sector", "count_sector_brute",
    "count_sector_fast", "count_triangle_brute", "count_triangle_fast", "estimate_type", "fit_error_exponent",
    "floor_certified", "main_term", "parse_slope", "predicted_count", "quadratic", "rational",
    "rational_closed_form", "run_sweep", "sector_area", "select_convergent", "verify_empty",
]
