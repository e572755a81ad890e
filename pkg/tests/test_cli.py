import json
from importlib import resources

import jsonschema
import pytest

from transonic.cli import main
from transonic.errors import (ConfigError, GeometryError, NonConvergenceError, RegimeError,
                              exit_code_for)
from transonic.io import read_csv

SMALL = "[run]\nmode = irrotational\n[domain]\nn_r = 65\nN = 4\n"


def _schema():
    text = resources.files("transonic").joinpath("schema/report.schema.json").read_text()
    return json.loads(text)


def _run(tmp_path, text, name="out", extra=()):
    cfg = tmp_path / f"{name}.ini"
    cfg.write_text(text)
    out = tmp_path / name
    return main(["--config", str(cfg), "--out", str(out), *extra]), out


def test_success_and_artifacts(tmp_path, capsys):
    rc, out = _run(tmp_path, SMALL)
    assert rc == 0
    assert "PASS  converged" in capsys.readouterr().out
    report = json.loads((out / "report.json").read_text())
    jsonschema.validate(report, _schema())
    assert report["passed"] and report["mode"] == "irrotational"
    f = read_csv(out / "fields.csv")
    assert len(f["r"]) == 65 * 20
    assert (out / "sonic.csv").exists() and (out / "spectrum.csv").exists()
    assert "wall_clock_s" in json.loads((out / "timing.json").read_text())


def test_deterministic_bytes(tmp_path):
    rc1, a = _run(tmp_path, SMALL, "a")
    rc2, b = _run(tmp_path, SMALL, "b")
    assert rc1 == rc2 == 0
    for name in ("fields.csv", "report.json", "sonic.csv", "spectrum.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes(), name


def test_failed_probe_exit_1(tmp_path):
    rc, out = _run(tmp_path, "[run]\nmode = verify\nl0_list = 1, -1\n[domain]\nn_r = 129\n")
    assert rc == 1
    report = json.loads((out / "report.json").read_text())
    jsonschema.validate(report, _schema())
    assert report["probes"]["multipliers_l0=-1"] is False
    assert "rejected" in report["results"]["multipliers"]["-1"]


def test_config_error_exit_2(tmp_path, capsys):
    rc, _ = _run(tmp_path, "[gas]\ngamma = 3.5\n")
    assert rc == 2
    assert "line 2" in capsys.readouterr().err


def test_regime_error_exit_3(tmp_path):
    rc, _ = _run(tmp_path, SMALL + "[solver]\nl0 = 0\n")
    assert rc == 3


def test_nonconvergence_exit_4(tmp_path):
    rc, _ = _run(tmp_path, SMALL + "[solver]\nmax_iter = 1\n")
    assert rc == 4


def test_exit_code_table():
    assert exit_code_for(ConfigError("x")) == 2
    assert exit_code_for(RegimeError("x")) == 3
    assert exit_code_for(NonConvergenceError("x")) == 4
    assert exit_code_for(GeometryError("x")) == 5
    assert exit_code_for(KeyError("x")) == 1


def test_list_presets(capsys):
    assert main(["--list-presets"]) == 0
    names = capsys.readouterr().out.split()
    assert "rotational" in names and "axisym" in names


def test_mode_argument_overrides(tmp_path):
    cfg = tmp_path / "c.ini"
    cfg.write_text("[run]\nmode = irrotational\n")
    out = tmp_path / "bg"
    assert main(["background", "--config", str(cfg), "--out", str(out)]) == 0
    report = json.loads((out / "report.json").read_text())
    jsonschema.validate(report, _schema())
    assert report["mode"] == "background"
    assert report["results"]["r_c"] == pytest.approx(1.378792307675, abs=1e-9)


def test_bad_threads():
    assert main(["--threads", "0", "--list-presets"]) == 2


def test_help_lists_keys(capsys):
    with pytest.raises(SystemExit):
        main(["--help"])
    text = capsys.readouterr().out
    assert "epsilon" in text and "TA_DATA_EPSILON" in text
