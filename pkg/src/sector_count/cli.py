"""sector-count: lattice points in thin sectors from the command line.

Exit codes: 0 success, 2 bad arguments or config, 3 counting error,
4 unwritable output, 5 verify-empty found a non-empty radius beyond its threshold.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import re
import sys
from fractions import Fraction
from pathlib import Path

from .asymptotics import (RATIONAL, classify_regime, main_term, parse_alpha_kind, rational_closed_form,
                          sector_area)
from .counting import DEFAULT_CEILING, count_sector, verify_empty
from .errors import RationalExhausted, SectorCountError
from .exact import Enclosure
from .harness import (ConfigError, SweepConfig, dyadic_eps, geometric_grid, load_config, power_schedule,
                      rows_to_csv, rows_to_json, run_sweep)
from .query import SectorQuery
from .slopes import SelectionMode, convergents, parse_slope, select_convergent

log = logging.getLogger("sector_count")

EXIT_OK, EXIT_USAGE, EXIT_COUNT, EXIT_OUTPUT, EXIT_NONEMPTY = 0, 2, 3, 4, 5

_DYADIC = re.compile(r"^([+-]?\d+)\*2\^(-?\d+)$")
_RATIONAL = re.compile(r"^[+-]?\d+(?:/\d+)?$")


class UsageError(Exception):
    pass


class OutputError(Exception):
    pass


def parse_eps(text: str) -> Fraction:
    """``m*2^-k`` or ``a/b``."""
    t = text.replace(" ", "")
    m = _DYADIC.match(t)
    if m:
        return Fraction(int(m.group(1))) * Fraction(2) ** int(m.group(2))
    if _RATIONAL.match(t):
        return Fraction(t)
    raise ValueError(f"eps must look like m*2^-k or a/b, got {text!r}")


def _rational_arg(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


def _typed(fn):
    def wrapped(text):
        try:
            return fn(text)
        except (ValueError, ZeroDivisionError) as exc:
            raise argparse.ArgumentTypeError(str(exc)) from None
    wrapped.__name__ = fn.__name__
    return wrapped


# -- output ---------------------------------------------------------------------

def _plain(v):
    if isinstance(v, Fraction):
        return str(v.numerator) if v.denominator == 1 else str(v)
    if isinstance(v, Enclosure):
        return {"lo": str(v.lo), "hi": str(v.hi), "mid": float(v.mid)}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, dict):
        return {k: _plain(x) for k, x in v.items()}
    return v


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, Enclosure):
        return f"{float(v.mid):.17g} +- {float(v.width) / 2:.3g}"
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(_plain(v))


def render(records: list[dict], fmt: str, single: bool = False) -> str:
    """Table, CSV or JSON text for a list of flat records."""
    if fmt == "json":
        data = _plain(records[0] if single else records)
        return json.dumps(data, indent=2) + "\n"
    if not records:
        return ""
    keys = list(records[0])
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(keys)
        for r in records:
            w.writerow([_cell(r[k]) for k in keys])
        return buf.getvalue()
    if single:
        width = max(len(k) for k in keys)
        return "".join(f"{k.ljust(width)}  {_cell(records[0][k])}\n" for k in keys)
    cells = [[_cell(r[k]) for k in keys] for r in records]
    widths = [max(len(k), *(len(row[i]) for row in cells)) for i, k in enumerate(keys)]
    lines = ["  ".join(k.ljust(w) for k, w in zip(keys, widths)).rstrip()]
    lines += ["  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in cells]
    return "\n".join(lines) + "\n"


def _write(path: Path, text: str) -> None:
    try:
        path.write_text(text)
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror or exc}") from None


def _check_writable(path: Path) -> None:
    parent = path.parent if str(path.parent) else Path(".")
    if path.is_dir() or not parent.is_dir() or not os.access(parent, os.W_OK) or (
            path.exists() and not os.access(path, os.W_OK)):
        raise OutputError(f"cannot write {path}")


# -- subcommands ------------------------------------------------------------------

def _alpha_kind(slope, eta):
    return RATIONAL if slope.is_rational else Fraction(eta)


def cmd_count(args) -> str:
    if (args.eps is None) == (args.lam is None):
        raise UsageError("give exactly one of --eps and --lambda")
    R = args.R
    eps = args.eps if args.eps is not None else dyadic_eps(args.c0, args.lam, R)
    query = SectorQuery(args.alpha, eps, R)
    report = count_sector(query, args.method, args.ceiling)
    record = {
        "alpha": str(args.alpha),
        "eps": eps,
        "R": R,
        "S": report.S,
        "Delta": report.Delta,
        "area": sector_area(query),
        "main_term": main_term(query),
        "regime": classify_regime(_alpha_kind(args.alpha, args.eta), args.lam).label if args.lam is not None else "",
        "method": report.method,
    }
    if args.breakdown:
        bd = report.breakdown
        if bd is None:
            raise SectorCountError("no partition breakdown: the count fell back to brute force")
        record.update({
            "delta_plus": bd.delta_plus,
            "delta_zero": bd.delta_zero,
            "delta_minus": bd.delta_minus,
            "partition_total": bd.total,
            "d_min": bd.d_min,
            "d_max": bd.d_max,
            "convergent": str(report.convergent or args.alpha),
            "band_M1": report.band[0] if report.band else None,
            "band_M2": report.band[1] if report.band else None,
        })
        if args.alpha.is_rational:
            cf = rational_closed_form(args.alpha.p, args.alpha.q, eps, R)
            record["beta"] = cf.beta
    return render([record], args.format, single=True)


def cmd_convergents(args) -> str:
    try:
        convs = convergents(args.alpha, args.depth)
    except RationalExhausted as exc:
        convs = exc.available
        log.info("%s", exc)
    selection = None
    if args.select_eps is not None:
        selection = select_convergent(args.alpha, args.select_eps, SelectionMode(args.mode), args.R, args.eta)
    records = []
    for c in convs:
        mark = selection is not None and (c.p, c.q) == (selection.chosen.p, selection.chosen.q)
        records.append({
            "i": c.index,
            "convergent": str(c),
            "delta_sign": "+" if c.delta_sign > 0 else "-" if c.delta_sign < 0 else "0",
            "delta_lo": c.delta_bound.lo,
            "delta_hi": c.delta_bound.hi,
            "selected": (selection.mode.value if mark else "") if selection else "",
        })
    if selection is not None and not any(r["selected"] for r in records):
        c = selection.chosen
        records.append({"i": c.index, "convergent": str(c), "delta_sign": "+" if c.delta_sign > 0 else "-",
                        "delta_lo": c.delta_bound.lo, "delta_hi": c.delta_bound.hi,
                        "selected": selection.mode.value})
    return render(records, args.format)


def cmd_classify(args) -> str:
    v = classify_regime(args.alpha_kind, args.lam)
    record = {
        "regime": v.label,
        "exponent": v.predicted_error_exponent if v.predicted_error_exponent is not None else "",
        "error_form": v.error_form,
        "beta_correction": v.beta_correction,
        "notes": v.notes,
    }
    return render([record], args.format, single=True)


def _sweep_config(args) -> SweepConfig:
    if args.config is not None:
        try:
            config = load_config(args.config)
        except OSError as exc:
            raise UsageError(f"cannot read config {args.config}: {exc.strerror or exc}") from None
    else:
        missing = [flag for flag, v in (("--alpha", args.alpha), ("--lambda", args.lam), ("--rmin", args.rmin),
                                        ("--rmax", args.rmax)) if v is None]
        if missing:
            raise UsageError(f"sweep needs --config or {', '.join(missing)}")
        config = SweepConfig(args.alpha, args.lam, args.rmin, args.rmax, points=args.points, c0=args.c0,
                             counter=args.counter, eta=args.eta, ceiling=args.ceiling)
    # command-line switches override the file
    for name in ("output", "jobs"):
        if getattr(args, name) is not None:
            setattr(config, name, getattr(args, name))
    if args.cross_check:
        config.cross_check = True
    if args.timing:
        config.timing = True
    if args.format != "table":
        config.format = args.format
    return config


def cmd_sweep(args) -> str:
    config = _sweep_config(args)
    if config.output is not None:
        _check_writable(Path(config.output))
    rows = run_sweep(config)
    if args.format == "table":
        text = render([r.record() for r in rows], "table")
    else:
        text = rows_to_csv(rows) if config.format == "csv" else rows_to_json(rows)
    if config.output is not None:
        _write(Path(config.output), rows_to_csv(rows) if config.format == "csv" else rows_to_json(rows))
        failed = sum(not r.ok for r in rows)
        return f"wrote {len(rows)} rows to {config.output}" + (f" ({failed} failed)" if failed else "") + "\n"
    return text


def cmd_verify_empty(args) -> tuple[str, int]:
    grid = geometric_grid(args.rmin, args.rmax, args.points)
    report = verify_empty(args.alpha, power_schedule(args.lam, args.c0), grid, args.r0, args.ceiling)
    if args.format == "table":
        lines = [f"{'R':>10}  S"] + [f"{_plain(R):>10}  {S}" for R, _, S in report.rows]
        largest = _plain(report.largest_nonempty_R) if report.largest_nonempty_R is not None else "none"
        lines.append(f"largest non-empty R: {largest}")
        lines.append("passed" if report.passed else "FAILED")
        text = "\n".join(lines) + "\n"
    else:
        records = [{"R": R, "eps_num": e.numerator, "eps_den": e.denominator, "S": S} for R, e, S in report.rows]
        if args.format == "json":
            text = json.dumps(_plain({
                "rows": records,
                "largest_nonempty_R": report.largest_nonempty_R,
                "threshold": report.threshold,
                "passed": report.passed,
            }), indent=2) + "\n"
        else:
            text = render(records, "csv")
    return text, EXIT_OK if report.passed else EXIT_NONEMPTY


# -- parser -------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sector-count", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="count", default=0, help="diagnostics on stderr")
    sub = parser.add_subparsers(dest="command", required=True)
    slope = _typed(parse_slope)
    rat = _rational_arg

    def common(p):
        p.add_argument("--format", choices=["table", "csv", "json"], default="table")

    p = sub.add_parser("count", help="count lattice points in one sector")
    p.add_argument("--alpha", type=slope, required=True, help="p/q or (a+b*sqrt(D))/c")
    p.add_argument("--eps", type=_typed(parse_eps), help="m*2^-k or a/b")
    p.add_argument("--lambda", dest="lam", type=rat, help="eps = c0 * R^-lambda, rounded to 96 bits")
    p.add_argument("--c0", type=rat, default=Fraction(1))
    p.add_argument("--R", type=rat, required=True)
    p.add_argument("--method", choices=["auto", "brute", "fast"], default="auto")
    p.add_argument("--breakdown", action="store_true", help="show the partition of the triangle count")
    p.add_argument("--eta", type=rat, default=Fraction(1), help="type of an irrational slope")
    p.add_argument("--ceiling", type=int, default=DEFAULT_CEILING, help="largest R for brute force")
    common(p)
    p.set_defaults(run=cmd_count)

    p = sub.add_parser("convergents", help="continued-fraction convergents")
    p.add_argument("--alpha", type=slope, required=True)
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--select-eps", type=_typed(parse_eps))
    p.add_argument("--mode", choices=[m.value for m in SelectionMode], default=SelectionMode.FIRST_ADMISSIBLE.value)
    p.add_argument("--R", type=rat, help="radius bound for error-optimal selection")
    p.add_argument("--eta", type=rat, default=Fraction(1))
    common(p)
    p.set_defaults(run=cmd_convergents)

    p = sub.add_parser("classify", help="regime for eps = R^-lambda")
    p.add_argument("--alpha-kind", type=_typed(parse_alpha_kind), required=True, help="rational or eta:H")
    p.add_argument("--lambda", dest="lam", type=rat, required=True)
    common(p)
    p.set_defaults(run=cmd_classify)

    p = sub.add_parser("sweep", help="measure |S - Area| over a geometric R grid")
    p.add_argument("--config", type=Path)
    p.add_argument("--alpha", type=slope)
    p.add_argument("--lambda", dest="lam", type=rat)
    p.add_argument("--c0", type=rat, default=Fraction(1))
    p.add_argument("--rmin", type=rat)
    p.add_argument("--rmax", type=rat)
    p.add_argument("--points", type=int)
    p.add_argument("--counter", choices=["auto", "brute", "fast"], default="auto")
    p.add_argument("--eta", type=rat, default=Fraction(1))
    p.add_argument("--ceiling", type=int, default=DEFAULT_CEILING)
    p.add_argument("--output", type=Path)
    p.add_argument("--jobs", type=int)
    p.add_argument("--cross-check", action="store_true", help="recount with brute force below the ceiling")
    p.add_argument("--timing", action="store_true", help="fill the ms column (output no longer reproducible)")
    common(p)
    p.set_defaults(run=cmd_sweep)

    p = sub.add_parser("verify-empty", help="check S = 0 along eps = c0 * R^-lambda")
    p.add_argument("--alpha", type=slope, required=True)
    p.add_argument("--lambda", dest="lam", type=rat, required=True)
    p.add_argument("--c0", type=rat, default=Fraction(1))
    p.add_argument("--rmin", type=rat, required=True)
    p.add_argument("--rmax", type=rat, required=True)
    p.add_argument("--points", type=int)
    p.add_argument("--r0", type=rat, help="non-empty radii up to this value are tolerated")
    p.add_argument("--ceiling", type=int, default=DEFAULT_CEILING)
    common(p)
    p.set_defaults(run=cmd_verify_empty)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    code = EXIT_OK
    try:
        out = args.run(args)
        if isinstance(out, tuple):
            out, code = out
    except (UsageError, ConfigError) as exc:
        print(f"sector-count: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OutputError as exc:
        print(f"sector-count: {exc}", file=sys.stderr)
        return EXIT_OUTPUT
    except (SectorCountError, ValueError) as exc:
        print(f"sector-count: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_COUNT
    if code != EXIT_OK:
        sys.stderr.write(out)
        print("sector-count: non-empty sector beyond the threshold", file=sys.stderr)
        return code
    sys.stdout.write(out)
    return code


if __name__ == "__main__":
    sys.exit(main())
