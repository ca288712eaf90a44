import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from krein_qm import cli
from krein_qm.csvio import format_value, parse_value, read_csv, to_csv_text, write_csv
from krein_qm.tables import (
    BELLS_HEADER,
    CONTOUR_HEADER,
    OSC_HEADER,
    PROPCHECK_HEADER,
    SPECTRUM2D_HEADER,
    SPECTRUM4D_HEADER,
)


def run_cli(capsys, *argv):
    code = cli.run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def table(text):
    return read_csv(io.StringIO(text))


# -- csv helpers ----------------------------------------------------------------


def test_format_value():
    assert format_value(0.0) == "0.0"
    assert float(format_value(1e-20)) == 1e-20
    assert format_value(0.1) == "0.10000000000000001"
    assert format_value(3) == "3"
    assert format_value("3m1") == "3m1"
    assert format_value(float("inf")) == "inf"
    assert format_value(np.float64(2.5)) == "2.5"


def test_csv_round_trip(tmp_path):
    rows = [(1, 0.1, "a", math.pi), (2, -0.0, "b", 1e300)]
    path = tmp_path / "t.csv"
    with open(path, "w", newline="") as fh:
        assert write_csv(fh, ("i", "x", "s", "y"), rows) == 2
    header, back = read_csv(path)
    assert header == ["i", "x", "s", "y"]
    assert back == [list(r) for r in rows]
    assert isinstance(back[0][0], int) and isinstance(back[1][1], float)
    assert to_csv_text(("i",), [(1,)]) == "i\n1\n"
    assert parse_value("nan") != parse_value("nan")


# -- subcommands ------------------------------------------------------------------


def test_bells(capsys):
    code, out, err = run_cli(capsys, "bells", "--n", "10,40")
    assert code == 0 and "bells" in err
    header, rows = table(out)
    assert tuple(header) == BELLS_HEADER
    assert len(rows) == 11 + 41
    peak = max((r for r in rows if r[0] == 40), key=lambda r: r[2])
    assert peak[1] == 12


def test_osc(capsys):
    code, out, _ = run_cli(capsys, "osc", "--theta", "0.5", "--n-phase", "5")
    assert code == 0
    header, rows = table(out)
    assert tuple(header) == OSC_HEADER and len(rows) == 5
    for th, x, pp, pm in rows:
        assert pp + pm == pytest.approx(1.0)
        assert pm >= 0.5


def test_nu_contours(capsys):
    code, out, _ = run_cli(capsys, "nu-contours", "--n-dm2", "40", "--n-theta", "40", "--levels", "0.1")
    assert code == 0
    header, rows = table(out)
    assert tuple(header) == CONTOUR_HEADER
    assert {r[3] for r in rows} == {"3m1", "3p1"}
    assert {r[4] for r in rows} == {"as"}
    code, out, _ = run_cli(capsys, "nu-contours", "--n-dm2", "20", "--n-theta", "20", "--channel", "mu,e")
    assert code == 0 and {r[4] for r in table(out)[1]} <= {"mu->e"}


def test_spectrum2d(capsys):
    code, out, _ = run_cli(capsys, "spectrum2d", "--n-g", "2", "--g-max", "0.1", "--n-points", "101", "--n-levels", "4")
    assert code == 0
    header, rows = table(out)
    assert tuple(header) == SPECTRUM2D_HEADER
    assert len(rows) == 8
    assert [r[1] for r in rows[:4]] == [0, 1, 2, 3]
    assert rows[0][2] == pytest.approx(0.5, abs=1e-2)
    assert {r[4] for r in rows} <= {"+", "-", "0"}


def test_spectrum4d_small(capsys):
    code, out, _ = run_cli(
        capsys, "spectrum4d", "--n-g", "1", "--n1", "41", "--n2", "41", "--k-max", "8", "--x-max", "6", "--n-levels", "3"
    )
    assert code == 0
    header, rows = table(out)
    assert tuple(header) == SPECTRUM4D_HEADER
    assert len(rows) == 3 and rows[0][:2] == [1.0, 1.5]


def test_propcheck(capsys):
    code, out, _ = run_cli(capsys, "propcheck")
    assert code == 0
    header, rows = table(out)
    assert tuple(header) == PROPCHECK_HEADER
    assert rows[0][:3] == [0.0, -0.25, -0.25]
    assert all(r[3] < 1e-12 for r in rows)


# -- configuration, exit codes, determinism ----------------------------------------------


def test_usage_errors(capsys):
    assert run_cli(capsys, "bogus")[0] == 1
    assert run_cli(capsys, "bells", "--p", "1.5")[0] == 1
    assert run_cli(capsys, "bells", "--n", "x")[0] == 1
    assert run_cli(capsys, "nu-contours", "--channel", "mu")[0] == 1
    assert run_cli(capsys, "bells", "--jobs", "0")[0] == 1


def test_exit_codes_pole_and_selftest_failure(capsys):
    code, _, err = run_cli(capsys, "propcheck", "--omega", "1")
    assert code == 1 and "pole" in err
    code, out, _ = run_cli(capsys, "selftest", "--null-tol", "1")
    assert code == 2
    assert "FAIL" in out


def test_config_file(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"p": 0.5, "n": [4]}))
    code, out, _ = run_cli(capsys, "bells", "--config", str(cfg))
    assert code == 0 and len(table(out)[1]) == 5
    code, out, _ = run_cli(capsys, "bells", "--config", str(cfg), "--n", "6")
    assert code == 0 and len(table(out)[1]) == 7
    cfg.write_text(json.dumps({"nope": 1}))
    assert run_cli(capsys, "bells", "--config", str(cfg))[0] == 1
    cfg.write_text("{not json")
    assert run_cli(capsys, "bells", "--config", str(cfg))[0] == 1
    assert run_cli(capsys, "bells", "--config", str(tmp_path / "missing.json"))[0] == 1


def test_jobs_env(monkeypatch, capsys):
    monkeypatch.setenv(cli.JOBS_ENV, "2")
    code, out2, _ = run_cli(capsys, "spectrum2d", "--n-g", "2", "--n-points", "101", "--n-levels", "3")
    assert code == 0
    monkeypatch.setenv(cli.JOBS_ENV, "1")
    code, out1, _ = run_cli(capsys, "spectrum2d", "--n-g", "2", "--n-points", "101", "--n-levels", "3")
    assert out1 == out2
    monkeypatch.setenv(cli.JOBS_ENV, "many")
    assert run_cli(capsys, "bells")[0] == 1


def test_out_file(tmp_path, capsys):
    path = tmp_path / "bells.csv"
    code, out, _ = run_cli(capsys, "bells", "--n", "3", "--out", str(path))
    assert code == 0 and out == ""
    header, rows = read_csv(path)
    assert len(rows) == 4


@pytest.mark.parametrize("argv", [["bells"], ["nu-contours", "--n-dm2", "30", "--n-theta", "30"]])
def test_byte_identical_reruns(tmp_path, argv):
    outs = []
    for i in range(2):
        path = tmp_path / f"{i}.csv"
        subprocess.run([sys.executable, "-m", "krein_qm", *argv, "--out", str(path)], check=True, capture_output=True)
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]
