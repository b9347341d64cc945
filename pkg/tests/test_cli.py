import json
from fractions import Fraction

import pytest

from sector_count.cli import main, parse_eps

PHI = "(1+1*sqrt(5))/2"
SQRT2 = "(0+1*sqrt(2))/1"


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def table(out):
    return dict(line.split(None, 1) if " " in line.strip() else (line.strip(), "")
                for line in out.splitlines() if line.strip())


def test_parse_eps():
    assert parse_eps("1*2^-30") == Fraction(1, 2**30)
    assert parse_eps("3/7") == Fraction(3, 7)
    assert parse_eps("5*2^3") == 40
    with pytest.raises(ValueError):
        parse_eps("0.001")


def test_count_diagonal(capsys):
    code, out, _ = run(capsys, "count", "--alpha", "1/1", "--eps", "1*2^-30", "--R", "100")
    assert code == 0 and table(out)["S"] == "70"


def test_count_flat(capsys):
    code, out, _ = run(capsys, "count", "--alpha", "0/1", "--eps", "1*2^-30", "--R", "100", "--format", "json")
    assert code == 0 and json.loads(out)["S"] == 100


def test_count_breakdown_sums_to_delta(capsys):
    code, out, _ = run(capsys, "count", "--alpha", PHI, "--lambda", "1.2", "--R", "1000", "--breakdown",
                       "--format", "json")
    data = json.loads(out)
    assert code == 0
    assert data["delta_plus"] + data["delta_zero"] + data["delta_minus"] == data["Delta"]
    assert data["regime"] == "Main"


def test_count_csv(capsys):
    code, out, _ = run(capsys, "count", "--alpha", "1/2", "--eps", "1/1000", "--R", "1000", "--format", "csv")
    header, row = out.splitlines()
    assert code == 0 and header.startswith("alpha,eps,R,S,Delta")


def test_count_needs_exactly_one_eps_source(capsys):
    code, out, err = run(capsys, "count", "--alpha", "1/2", "--R", "100")
    assert code == 2 and out == ""
    code, out, _ = run(capsys, "count", "--alpha", "1/2", "--R", "100", "--eps", "1/8", "--lambda", "1")
    assert code == 2 and out == ""


def test_count_precondition_error(capsys):
    code, out, err = run(capsys, "count", "--alpha", "1/1", "--eps", "3", "--R", "100")
    assert code == 3 and out == "" and "epsilon" in err


def test_count_brute_above_ceiling(capsys):
    code, out, err = run(capsys, "count", "--alpha", SQRT2, "--eps", "1/100", "--R", "1000000", "--method", "brute")
    assert code == 3 and out == "" and "ceiling" in err


@pytest.mark.parametrize("argv", [
    ["count", "--alpha", "1/1", "--R", "100", "--bogus"],
    ["count", "--alpha", "sqrt(2)", "--eps", "1/8", "--R", "10"],
    ["count", "--alpha", "1/1", "--eps", "0.1", "--R", "10"],
    ["classify", "--alpha-kind", "eta:1/2", "--lambda", "1"],
    ["classify", "--alpha-kind", "eta:1"],
    ["frobnicate"],
])
def test_parse_errors_exit_2(capsys, argv):
    code, out, _ = run(capsys, *argv)
    assert code == 2 and out == ""


def test_convergents_golden(capsys):
    code, out, _ = run(capsys, "convergents", "--alpha", PHI, "--depth", "4", "--format", "json")
    assert code == 0
    assert [r["convergent"] for r in json.loads(out)] == ["1/1", "2/1", "3/2", "5/3", "8/5"]


def test_convergents_sqrt2(capsys):
    code, out, _ = run(capsys, "convergents", "--alpha", SQRT2, "--depth", "3", "--format", "csv")
    assert [line.split(",")[1] for line in out.splitlines()[1:]] == ["1/1", "3/2", "7/5", "17/12"]


def test_convergents_selection(capsys):
    code, out, _ = run(capsys, "convergents", "--alpha", PHI, "--depth", "8", "--select-eps", "1/100",
                       "--format", "json")
    marked = [r["convergent"] for r in json.loads(out) if r["selected"]]
    assert code == 0 and marked == ["21/13"]


def test_convergents_selection_rational(capsys):
    code, out, _ = run(capsys, "convergents", "--alpha", "3/7", "--depth", "3", "--select-eps", "1/100")
    assert code == 3 and out == ""


def test_convergents_rational_short_expansion(capsys):
    code, out, _ = run(capsys, "convergents", "--alpha", "3/7", "--depth", "10", "--format", "json")
    assert code == 0 and [r["convergent"] for r in json.loads(out)] == ["0/1", "1/2", "3/7"]


def test_classify(capsys):
    code, out, _ = run(capsys, "classify", "--alpha-kind", "eta:1", "--lambda", "1.5", "--format", "json")
    data = json.loads(out)
    assert code == 0 and data["regime"] == "Main" and data["exponent"] == "1/4"
    _, out, _ = run(capsys, "classify", "--alpha-kind", "eta:2", "--lambda", "2")
    assert table(out)["regime"] == "Gap"
    _, out, _ = run(capsys, "classify", "--alpha-kind", "rational", "--lambda", "2")
    assert table(out)["regime"] == "RationalLineOnly"


CONFIG = """\
slope = (1+1*sqrt(5))/2
lambda = 6/5
R_min = 1000
R_max = 1000000
points = 13
"""


def test_sweep_config_is_reproducible(tmp_path, capsys):
    cfg = tmp_path / "phi.cfg"
    cfg.write_text(CONFIG)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(capsys, "sweep", "--config", str(cfg), "--output", str(a))[0] == 0
    assert run(capsys, "sweep", "--config", str(cfg), "--output", str(b))[0] == 0
    assert a.read_bytes() == b.read_bytes()
    assert len(a.read_text().splitlines()) == 14


def test_sweep_stdout_json(capsys):
    code, out, _ = run(capsys, "sweep", "--alpha", SQRT2, "--lambda", "1/2", "--rmin", "100", "--rmax", "1000",
                       "--points", "3", "--format", "json")
    rows = json.loads(out)
    assert code == 0 and len(rows) == 3 and rows[0]["R"] == "100"


def test_sweep_bad_config_line(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text(CONFIG + "colour = blue\n")
    code, out, err = run(capsys, "sweep", "--config", str(cfg))
    assert code == 2 and out == "" and "line 6" in err


def test_sweep_missing_config(tmp_path, capsys):
    code, out, _ = run(capsys, "sweep", "--config", str(tmp_path / "nope.cfg"))
    assert code == 2 and out == ""


def test_sweep_unwritable_output(tmp_path, capsys):
    cfg = tmp_path / "phi.cfg"
    cfg.write_text(CONFIG)
    code, out, _ = run(capsys, "sweep", "--config", str(cfg), "--output", str(tmp_path / "missing" / "x.csv"))
    assert code == 4 and out == ""


def test_verify_empty_passes(capsys):
    code, out, _ = run(capsys, "verify-empty", "--alpha", SQRT2, "--lambda", "2.5", "--rmin", "10",
                       "--rmax", "10000")
    assert code == 0 and "passed" in out


def test_verify_empty_violation(capsys):
    code, out, err = run(capsys, "verify-empty", "--alpha", SQRT2, "--lambda", "0.5", "--rmin", "10",
                         "--rmax", "100")
    assert code == 5 and out == "" and "largest non-empty R: 100" in err


def test_verify_empty_threshold(capsys):
    code, out, _ = run(capsys, "verify-empty", "--alpha", SQRT2, "--lambda", "0.5", "--rmin", "100",
                       "--rmax", "100", "--r0", "100", "--format", "json")
    data = json.loads(out)
    assert code == 0 and data["largest_nonempty_R"] == "100" and len(data["rows"]) == 1
