import json

import pytest

from superscar.cli import main
from superscar.io import read_field


def test_spectral_sweep(capsys):
    assert main(["spectral", "sweep", "--hbar", "0.04", "0.02", "0.01"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0].startswith("hbar,lambda,T") and len(lines) == 4


def test_flow_cylinder(capsys):
    assert main(["flow", "cylinder", "--surface", "l_surface", "--x0", "0.5", "1.5"]) == 0
    assert json.loads(capsys.readouterr().out)["length"] == 1.0


def test_flow_trace_singular(capsys):
    assert main(["flow", "trace", "--surface", "l_surface", "--xi0", "1", "1"]) == 0
    assert json.loads(capsys.readouterr().out)["terminal"] == "HitSingularity"


def test_flow_search(capsys):
    assert main(["flow", "search", "--bound", "1.5"]) == 0
    assert len(json.loads(capsys.readouterr().out)) >= 2


def test_error_exit(capsys):
    assert main(["flow", "cylinder", "--surface", "l_surface", "--xi0", "1", "1"]) == 2
    assert "HitSingularity" in capsys.readouterr().err


def test_surface_norms(capsys):
    assert main(["surface-quasimode", "norms", "--hbar", "0.05"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["method"] == "surface-lattice" and out["width"] > 0


def test_surface_eval(tmp_path, capsys):
    path = tmp_path / "f.bin"
    assert main(["surface-quasimode", "eval", "--hbar", "0.2", "--out", str(path)]) == 0
    vals, head = read_field(path)
    assert vals.shape == tuple(head["shape"]) and head["field"] == "quasimode"


def test_measure_weyl(capsys):
    assert main(["measure", "weyl", "--hbar", "0.05"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "symbol,value,target,error" and len(lines) == 10


def test_measure_fold(capsys):
    assert main(["measure", "fold", "--hbar", "0.05", "--xi0", "1", "1"]) == 0
    rows = capsys.readouterr().out.strip().splitlines()[1:]
    assert len(rows) == 4
    assert all(abs(float(r.split(",")[2]) - 0.25) < 0.01 for r in rows)


def test_run_and_fit(tmp_path, capsys):
    cfg = tmp_path / "c.toml"
    cfg.write_text('hbar = [0.06, 0.04, 0.03]\nname = "s"\n')
    assert main(["run", str(cfg), "--output-dir", str(tmp_path)]) == 0
    capsys.readouterr()
    assert main(["fit", str(tmp_path / "s.csv")]) == 0
    assert 0.3 < json.loads(capsys.readouterr().out)["exponent"] < 0.55


def test_bad_subcommand():
    with pytest.raises(SystemExit):
        main(["nope"])
