"""Sweeps over R-grids with eps = c0 * R^-lambda, error-exponent fits and bound checks."""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Optional, Sequence, Union

import gmpy2
import numpy as np

from .asymptotics import RATIONAL, classify_regime, main_term, sector_area
from .counting import DEFAULT_CEILING, count_sector_brute, count_sector_fast
from .errors import InsufficientData, SectorCountError
from .exact import Enclosure
from .query import SectorQuery, default_precision
from .slopes import SlopeValue, parse_slope

log = logging.getLogger(__name__)

CSV_FIELDS = ["R", "eps_num", "eps_den", "S", "Delta", "area_mid", "area_width", "main_term",
              "abs_err", "ratio", "regime", "method", "ms"]
EPS_BITS = 96
DEFAULT_RATIO = 2 ** 0.5
DEFAULT_CAP = 10


class ConfigError(ValueError):
    def __init__(self, message: str, line: Optional[int] = None):
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line


@dataclass
class SweepConfig:
    slope: SlopeValue
    lam: Fraction
    R_min: Fraction
    R_max: Fraction
    points: Optional[int] = None  # None: geometric ratio sqrt(2)
    c0: Fraction = Fraction(1)
    counter: str = "auto"  # auto | brute | fast
    output: Optional[Path] = None
    format: str = "csv"  # csv | json
    seed: int = 0
    eta: Fraction = Fraction(1)
    ceiling: int = DEFAULT_CEILING
    cross_check: bool = False
    timing: bool = False  # wall times make output run-dependent
    jobs: int = 1

    def __post_init__(self):
        self.lam, self.c0, self.eta = Fraction(self.lam), Fraction(self.c0), Fraction(self.eta)
        self.R_min, self.R_max = Fraction(self.R_min), Fraction(self.R_max)
        if self.lam < 0:
            raise ConfigError("lambda must be >= 0")
        if self.c0 <= 0:
            raise ConfigError("c0 must be positive")
        if self.R_min < 10 or self.R_max < self.R_min:
            raise ConfigError("need 10 <= R_min <= R_max")
        if self.points is not None and (self.points < 1 or (self.points == 1 and self.R_max != self.R_min)):
            raise ConfigError("points must be >= 2 unless R_min == R_max")
        if self.counter not in ("auto", "brute", "fast"):
            raise ConfigError(f"unknown counter {self.counter!r}")
        if self.format not in ("csv", "json"):
            raise ConfigError(f"unknown format {self.format!r}")
        if self.eta < 1:
            raise ConfigError("eta must be >= 1")

    @property
    def alpha_kind(self):
        return RATIONAL if self.slope.is_rational else self.eta

    def grid(self) -> list[Fraction]:
        return geometric_grid(self.R_min, self.R_max, self.points)


_CONFIG_KEYS = {
    "slope": parse_slope,
    "alpha": parse_slope,
    "lambda": Fraction,
    "c0": Fraction,
    "R_min": Fraction,
    "R_max": Fraction,
    "points": int,
    "counter": str,
    "output": Path,
    "format": str,
    "seed": int,
    "eta": Fraction,
    "ceiling": int,
    "cross_check": lambda s: _parse_bool(s),
    "timing": lambda s: _parse_bool(s),
    "jobs": int,
}
_FIELD_FOR_KEY = {"lambda": "lam", "alpha": "slope"}


def _parse_bool(s: str) -> bool:
    t = s.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def parse_config(text: str) -> SweepConfig:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _CONFIG_KEYS:
            raise ConfigError(f"unknown key {key!r}", lineno)
        try:
            values[_FIELD_FOR_KEY.get(key, key)] = _CONFIG_KEYS[key](value)
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"bad value for {key}: {exc}", lineno) from None
    missing = [k for k in ("slope", "lam", "R_min", "R_max") if k not in values]
    if missing:
        raise ConfigError(f"missing keys: {', '.join('lambda' if k == 'lam' else k for k in missing)}")
    return SweepConfig(**values)


def load_config(path) -> SweepConfig:
    return parse_config(Path(path).read_text())


def geometric_grid(R_min, R_max, points: Optional[int] = None, ratio: float = DEFAULT_RATIO) -> list[Fraction]:
    """Integer radii spaced geometrically from R_min to R_max (both included).

    Without ``points`` the step is the largest one not exceeding ``ratio``.
    """
    R_min, R_max = Fraction(R_min), Fraction(R_max)
    if R_max == R_min or points == 1:
        return [R_min]
    span = math.log(R_max / R_min)
    if points is None:
        points = max(2, math.ceil(span / math.log(ratio) - 1e-9) + 1)
    grid = [R_min]
    for k in range(1, points - 1):
        R = Fraction(round(float(R_min) * math.exp(span * k / (points - 1))))
        if R > grid[-1]:
            grid.append(R)
    if R_max > grid[-1]:
        grid.append(R_max)
    return grid


def dyadic_eps(c0, lam, R, bits: int = EPS_BITS) -> Fraction:
    """c0 * R^-lambda truncated to a multiple of 2^-bits.

    The power is evaluated with bits + 160 bits of working precision, so the
    result is the exact truncation unless the value lies within about
    2^-(bits+150) of a multiple of 2^-bits.  It is deterministic either way.
    """
    c0, lam, R = Fraction(c0), Fraction(lam), Fraction(R)
    with gmpy2.context(gmpy2.get_context(), precision=bits + 160, round=gmpy2.RoundDown):
        x = gmpy2.mpq(c0.numerator, c0.denominator) * gmpy2.mpfr(gmpy2.mpq(R.numerator, R.denominator)) ** (
            -gmpy2.mpfr(gmpy2.mpq(lam.numerator, lam.denominator)))
        k = int(gmpy2.floor(x * (1 << bits)))
    if k <= 0:
        raise ValueError(f"eps = {c0} * {R}^-{lam} underflows 2^-{bits}")
    return Fraction(k, 1 << bits)


def power_schedule(lam, c0=1, bits: int = EPS_BITS) -> Callable[[Fraction], Fraction]:
    return lambda R: dyadic_eps(c0, lam, R, bits)


@dataclass
class ExperimentRow:
    R: Fraction
    eps: Optional[Fraction] = None
    S: Optional[int] = None
    Delta: Optional[int] = None
    area: Optional[Enclosure] = None
    main_term: Union[Fraction, Enclosure, None] = None
    abs_err: Optional[float] = None
    ratio: Optional[float] = None
    regime: str = ""
    method: str = ""
    ms: Optional[float] = None
    error: Optional[str] = None
    flags: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.error is None

    def record(self) -> dict:
        """Row keyed by the CSV header; values as they are written."""
        if not self.ok:
            return {**{k: "" for k in CSV_FIELDS}, "R": _num(self.R), "regime": f"error: {self.error}",
                    "method": "error"}
        mt = self.main_term.mid if isinstance(self.main_term, Enclosure) else self.main_term
        return {
            "R": _num(self.R),
            "eps_num": str(self.eps.numerator),
            "eps_den": str(self.eps.denominator),
            "S": str(self.S),
            "Delta": str(self.Delta),
            "area_mid": _g(self.area.mid),
            "area_width": _g(self.area.width),
            "main_term": _g(mt),
            "abs_err": _g(self.abs_err),
            "ratio": _g(self.ratio),
            "regime": self.regime,
            "method": self.method,
            "ms": "" if self.ms is None else f"{self.ms:.3f}",
        }


def _num(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else str(x)


def _g(x) -> str:
    return format(float(x), ".17g")


def measure_row(config: SweepConfig, R: Fraction) -> ExperimentRow:
    """Count one grid radius and compare with the sector area."""
    verdict = classify_regime(config.alpha_kind, config.lam)
    row = ExperimentRow(R=R, regime=verdict.label)
    try:
        eps = dyadic_eps(config.c0, config.lam, R)
        row.eps = eps
        query = SectorQuery(config.slope, eps, R)
        t0 = time.perf_counter()
        if config.counter == "brute":
            report = count_sector_brute(query, config.ceiling)
        else:
            report = count_sector_fast(query, config.ceiling)
        elapsed = time.perf_counter() - t0
        if config.cross_check and R <= config.ceiling and report.method != "brute":
            brute = count_sector_brute(query, config.ceiling)
            if (brute.S, brute.Delta) != (report.S, report.Delta):
                raise SectorCountError(f"fast/brute mismatch at R={R}: {report.S} vs {brute.S}")
        bits = default_precision()
        area = sector_area(query, bits)
        err = abs(report.S - area.mid)
        if err and area.width > Fraction(1, 10**6) * err:
            area = sector_area(query, 2 * bits)
            if area.width > Fraction(1, 10**6) * err:
                row.flags.append("area-enclosure-wide")
                log.warning("R=%s: area enclosure width %s exceeds 1e-6 * |S - area|", R, float(area.width))
        row.S, row.Delta, row.area = report.S, report.Delta, area
        row.main_term = main_term(query, bits)
        row.abs_err = float(abs(report.S - area.mid))
        row.ratio = float(report.S / area.mid) if area.mid else math.nan
        row.method = report.method
        if config.timing:
            row.ms = elapsed * 1000
    except (SectorCountError, ValueError) as exc:
        row.error = str(exc)
        log.error("R=%s: %s", R, exc)
    return row


def run_sweep(config: SweepConfig) -> list[ExperimentRow]:
    """One row per grid radius, in increasing R; failed rows carry an error marker."""
    grid = config.grid()
    if config.counter == "brute" and grid[-1] > config.ceiling:
        log.warning("R_max exceeds the brute ceiling; those rows will fail")
    if config.jobs > 1:
        with ProcessPoolExecutor(config.jobs) as pool:
            rows = list(pool.map(measure_row, [config] * len(grid), grid))
    else:
        rows = []
        for i, R in enumerate(grid, 1):
            rows.append(measure_row(config, R))
            log.info("[%d/%d] R=%s S=%s", i, len(grid), R, rows[-1].S)
    return rows


def rows_to_csv(rows: Sequence[ExperimentRow]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row.record())
    return buf.getvalue()


def rows_to_json(rows: Sequence[ExperimentRow]) -> str:
    return json.dumps([row.record() for row in rows], indent=2) + "\n"


def write_rows(rows: Sequence[ExperimentRow], path, fmt: str = "csv") -> None:
    text = rows_to_csv(rows) if fmt == "csv" else rows_to_json(rows)
    Path(path).write_text(text)


# -- analysis ------------------------------------------------------------------

@dataclass(frozen=True)
class ExponentFit:
    slope: float
    r2: float
    used: int
    excluded: int

    @property
    def slope_rational(self) -> Fraction:
        return Fraction(self.slope).limit_denominator(10**6)


def fit_error_exponent(rows: Sequence[ExperimentRow], min_rows: int = 5) -> ExponentFit:
    """Least-squares slope of log|S - Area| against log R."""
    usable = [r for r in rows if r.ok and r.abs_err and r.abs_err > 0]
    excluded = len(rows) - len(usable)
    if excluded:
        log.info("fit: %d rows excluded (failed or zero error)", excluded)
    if len(usable) < min_rows:
        raise InsufficientData(f"need {min_rows} rows with nonzero error, have {len(usable)}")
    x = np.log([float(r.R) for r in usable])
    y = np.log([r.abs_err for r in usable])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
    return ExponentFit(float(slope), r2, len(usable), excluded)


@dataclass(frozen=True)
class BoundCheck:
    C_measured: float
    passed: bool
    worst_R: Optional[Fraction] = None


def bound_value(form: str, R, eps, exponent=None) -> float:
    R, eps = float(R), float(eps)
    if form == "R":
        return R
    if form == "R^e":
        if exponent is None:
            raise ValueError("form R^e needs an exponent")
        return R ** float(exponent)
    if form == "1+(Reps)^2":
        return 1 + (R * eps) ** 2
    raise ValueError(f"unknown bound form {form!r}")


def check_bound(rows: Sequence[ExperimentRow], form: str, cap: float = DEFAULT_CAP, exponent=None,
                residual: Optional[Callable[[ExperimentRow], float]] = None) -> BoundCheck:
    """C = max over rows of residual / bound; passes iff C <= cap.

    The residual defaults to |S - Area|.
    """
    residual = residual or (lambda r: r.abs_err)
    C, worst = 0.0, None
    for row in rows:
        if not row.ok:
            continue
        c = residual(row) / bound_value(form, row.R, row.eps, exponent)
        if c > C:
            C, worst = c, row.R
    return BoundCheck(C, C <= cap, worst)
