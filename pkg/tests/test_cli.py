import csv
import json

import numpy as np
import pytest

from fracdisk import __version__
from fracdisk.cli import EXIT_CHECK_FAILED, EXIT_CONFIG, EXIT_OK, EXIT_SOLVE, main


def _rows(path):
    lines = [ln for ln in path.read_text().splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(lines))


def _header(path):
    return [ln for ln in path.read_text().splitlines() if ln.startswith("#")]


def _run(tmp_path, *args, name="out"):
    out = tmp_path / name
    code = main([*args, "--out", str(out)])
    return code, out


def test_solve_single_mode_example(tmp_path):
    code, out = _run(tmp_path, "solve", "--alpha", "1.5", "--K", "identity", "--f", "mode:0,0,+1", "--N", "8", "--L", "8")
    assert code == EXIT_OK
    rows = _rows(out / "coeffs.csv")
    assert len(rows) == 1
    assert (rows[0]["l"], rows[0]["n"], rows[0]["mu"]) == ("0", "0", "1")
    assert float(rows[0]["coefficient"]) == pytest.approx(1 / 2.3891043071046817413, rel=1e-12)
    report = json.loads((out / "report.json").read_text())
    assert report["result"]["wellposed"] and report["result"]["residual"] < 1e-12
    assert {"coeffs.csv", "report.json", "field.csv"} <= {p.name for p in out.iterdir()}


def test_every_output_echoes_run_header(tmp_path):
    code, out = _run(tmp_path, "solve", "--alpha", "1.4", "--K", "diag:1,1.5", "--f", "gauss:2", "--N", "5",
                     "--L", "4", "--seed", "7")
    assert code == EXIT_OK
    for name in ("coeffs.csv", "field.csv"):
        head = " ".join(_header(out / name))
        for token in ("alpha=1.4", "L=4", "N=5", "K=diag:1,1.5", "seed=7", f"version={__version__}"):
            assert token in head, (name, token)
    meta = json.loads((out / "report.json").read_text())["meta"]
    assert meta == {"command": "solve", "alpha": 1.4, "L": 4, "N": 5, "K": "diag:1,1.5", "seed": 7, "version": __version__}


def test_verify_constants_example_all_pass(tmp_path):
    code, out = _run(tmp_path, "verify", "--alpha", "1.8", "--suite", "constants")
    rows = _rows(out / "verify_summary.csv")
    failing = [r["check"] for r in rows if r["pass"] != "true"]
    assert failing == [] and code == EXIT_OK


def test_verify_operators_suite_passes(tmp_path):
    code, out = _run(tmp_path, "verify", "--alpha", "1.5", "--suite", "operators")
    assert code == EXIT_OK
    assert all(r["pass"] == "true" for r in _rows(out / "verify_summary.csv"))


def test_exploratory_rows_carry_no_verdict(tmp_path):
    code, out = _run(tmp_path, "verify", "--alpha", "1.5", "--suite", "exploratory")
    assert code == EXIT_OK
    assert [r["pass"] for r in _rows(out / "verify_summary.csv")] == ["exploratory"]


@pytest.mark.parametrize("text", ["alpha: [1.5\nN: 4\n", "alpha: 1.5\nbogus: 3\n", "alpha: 2.5\n", "N: four\n", "- 1\n- 2\n"])
def test_malformed_config_leaves_no_outputs(tmp_path, text, capsys):
    cfg = tmp_path / "cfg.yaml"
    cfg.write_text(text)
    code, out = _run(tmp_path, "solve", "--config", str(cfg))
    assert code == EXIT_CONFIG
    assert not out.exists()


def test_parse_error_reports_line(tmp_path, caplog):
    cfg = tmp_path / "cfg.yaml"
    cfg.write_text("alpha: 1.5\nN: [4\n")
    _run(tmp_path, "solve", "--config", str(cfg))
    assert "line 3" in caplog.text or "line 2" in caplog.text


def test_flags_override_config(tmp_path):
    cfg = tmp_path / "cfg.yaml"
    cfg.write_text("alpha: 1.3\nN: 3\nL: 3\nf: mode:0,1,+1\n")
    code, out = _run(tmp_path, "solve", "--config", str(cfg), "--N", "5")
    assert code == EXIT_OK
    meta = json.loads((out / "report.json").read_text())["meta"]
    assert meta["alpha"] == 1.3 and meta["N"] == 5 and meta["L"] == 3


def test_unknown_selectors_and_spd_failure(tmp_path):
    assert _run(tmp_path, "solve", "--K", "spiral:1")[0] == EXIT_CONFIG
    assert _run(tmp_path, "solve", "--f", "nope")[0] == EXIT_CONFIG
    code, out = _run(tmp_path, "solve", "--K", "rotated:1,-1,0.3")
    assert code == EXIT_SOLVE and not out.exists()


def test_illposed_contrast_warns_unless_strict(tmp_path):
    code, out = _run(tmp_path, "solve", "--alpha", "1.2", "--K", "diag:1,10", "--N", "4", "--L", "4", name="a")
    assert code == EXIT_OK
    assert json.loads((out / "report.json").read_text())["result"]["wellposed"] is False
    code, out = _run(tmp_path, "solve", "--alpha", "1.2", "--K", "diag:1,10", "--strict", name="b")
    assert code == EXIT_CONFIG and not out.exists()


@pytest.mark.parametrize("args", [
    ("solve", "--K", "angular:0.2", "--f", "poly:2,1", "--N", "6", "--L", "6", "--seed", "3"),
    ("apply", "--K", "radial:0.1", "--u", "0,0,+1:1;2,1,-1:0.3", "--N", "3", "--L", "3"),
    ("eigs", "--N", "4", "--L", "4"),
    ("verify", "--suite", "solver", "--seed", "4"),
    ("convergence", "--f", "gauss:4", "--Ns", "2,4"),
])
def test_rerun_is_bit_identical(tmp_path, args):
    assert _run(tmp_path, *args, name="a")[0] == EXIT_OK
    assert _run(tmp_path, *args, name="b")[0] == EXIT_OK
    for f in (tmp_path / "a").iterdir():
        a, b = f.read_text(), (tmp_path / "b" / f.name).read_text()
        if f.name == "report.json":
            a, b = json.loads(a), json.loads(b)
            a.pop("timing", None)
            b.pop("timing", None)
        assert a == b, f.name


def test_apply_writes_image(tmp_path):
    code, out = _run(tmp_path, "apply", "--u", "0,0,+1:1", "--alpha", "1.5")
    assert code == EXIT_OK
    rows = _rows(out / "coeffs.csv")
    assert len(rows) == 1 and float(rows[0]["coefficient"]) == pytest.approx(2.3891043071046817413, rel=1e-12)
    assert _run(tmp_path, "apply", name="x")[0] == EXIT_CONFIG


def test_eigs_table(tmp_path):
    code, out = _run(tmp_path, "eigs", "--alpha", "1.5", "--L", "3", "--N", "3")
    assert code == EXIT_OK
    rows = _rows(out / "eigs.csv")
    assert len(rows) == 16
    for r in rows:
        assert float(r["lambda"]) == pytest.approx(float(r["lambda_weak_form"]), rel=1e-12)


def _conv(tmp_path, name, *args):
    code, out = _run(tmp_path, "convergence", "--alpha", "1.5", *args, name=name)
    assert code == EXIT_OK
    rows = _rows(out / "convergence.csv")
    return np.array([float(r["error"]) for r in rows]), np.array([float(r["slope"]) for r in rows])


def test_convergence_manufactured_reaches_tolerance(tmp_path):
    err, _ = _conv(tmp_path, "m", "--u", "0,0,+1:1;3,2,-1:0.5", "--K", "radial:0.1", "--Ns", "2,4,8")
    assert err[0] > 1e-3
    assert np.all(err[1:] < 1e-10)


def test_convergence_smooth_versus_rough(tmp_path):
    eg, sg = _conv(tmp_path, "g", "--f", "gauss:4", "--Ns", "4,8,16,32")
    above_floor = eg > 1e-12
    assert np.all(np.diff(eg[above_floor]) < 0)
    assert eg[-1] < 1e-10
    ea, sa = _conv(tmp_path, "a", "--f", "absx", "--Ns", "4,8,16,32")
    assert np.all(np.diff(ea) < 0)
    assert np.nanmax(sa) < np.nanmin(sg[1:3][above_floor[1:3]])
    assert 0.5 < sa[-1] < 4.0


def test_verify_exit_code_follows_summary(tmp_path):
    code, out = _run(tmp_path, "verify", "--alpha", "1.5", "--suite", "constants")
    rows = _rows(out / "verify_summary.csv")
    any_failed = any(r["pass"] == "false" for r in rows)
    assert code == (EXIT_CHECK_FAILED if any_failed else EXIT_OK)
    assert len(rows) == 10
