import json
import math

import pytest

from superscar.errors import NonPositiveData
from superscar.experiments import (COLUMNS, ExperimentConfig, emit_results, fit_power_law,
                                   load_config, read_csv, rows_to_csv, run_sweep)


def test_fit_exact_power():
    fit = fit_power_law([(x, 3.0 * x ** 0.375) for x in (10, 100, 1000, 1e4)])
    assert fit.exponent == pytest.approx(0.375, abs=1e-12)
    assert math.exp(fit.intercept) == pytest.approx(3.0)
    assert fit.residual_rms < 1e-12
    assert fit.predict(10.0) == pytest.approx(3.0 * 10 ** 0.375)


def test_fit_guards():
    with pytest.raises(NonPositiveData):
        fit_power_law([(1, 1), (2, 0), (3, 1)])
    with pytest.raises(ValueError):
        fit_power_law([(1, 1), (2, 2)])


def test_config_validation():
    with pytest.raises(ValueError):
        ExperimentConfig(hbar=(0.01, 0.02, 0.04))
    c = ExperimentConfig()
    assert c.exponent == pytest.approx(0.85)
    assert c.config_hash() == ExperimentConfig().config_hash()
    assert c.config_hash() != ExperimentConfig(epsilon=0.04).config_hash()


def test_load_config(tmp_path):
    p = tmp_path / "c.toml"
    p.write_text('surface = "square_torus"\nhbar = [0.04, 0.02, 0.01]\nx0 = [0.5, 0.5]\n')
    c = load_config(p)
    assert c.surface == "square_torus" and c.hbar == (0.04, 0.02, 0.01)
    p.write_text('surface = "mine.json"\n')
    assert load_config(p).surface == str(tmp_path / "mine.json")


@pytest.fixture(scope="module")
def small_sweep(tmp_path_factory):
    out = tmp_path_factory.mktemp("sweep")
    cfg = ExperimentConfig(hbar=(0.06, 0.04, 0.03), output_dir=str(out), name="desk")
    return run_sweep(cfg), out


def test_sweep_rows(small_sweep):
    res, out = small_sweep
    assert res.ok and len(res.rows) == 3
    for r in res.rows:
        assert r["certified"] is True
        assert r["surface_width"] == pytest.approx(r["euclid_width"], rel=1e-3)
        assert 0.2 <= r["width_times_T"] <= 5
        assert r["localization_mass"] > 0.99
    assert 0.3 < res.fits["width_vs_lambda"].exponent < 0.55


def test_sweep_files(small_sweep):
    res, out = small_sweep
    rows = read_csv(out / "desk.csv")
    assert list(rows[0]) == COLUMNS
    assert rows[1]["surface_width"] == res.rows[1]["surface_width"]  # exact round trip
    man = json.loads((out / "desk.manifest.json").read_text())
    assert man["config_hash"] == res.config.config_hash()
    assert man["ok"] is True


def test_sweep_records_errors(tmp_path):
    cfg = ExperimentConfig(surface="l_surface", x0=(0.5, 0.5), xi0=(1, 1),
                           hbar=(0.04, 0.02, 0.01), output_dir=str(tmp_path))
    res = run_sweep(cfg)
    assert not res.ok
    assert all(r["status"] == "error" and "HitSingularity" in r["error"] for r in res.rows)
    assert res.fits == {}


def test_missing_surface(tmp_path):
    cfg = ExperimentConfig(surface=str(tmp_path / "none.json"), hbar=(0.04, 0.02, 0.01))
    res = run_sweep(cfg, write=False)
    assert all(r["status"] == "error" for r in res.rows)


def test_json_output(small_sweep, tmp_path):
    res, _ = small_sweep
    paths = emit_results(res, tmp_path, "j", fmt="json")
    assert len(json.loads(paths[0].read_text())) == 3
    with pytest.raises(ValueError):
        emit_results(res, tmp_path, "x", fmt="xml")


def test_csv_special_values():
    text = rows_to_csv([{"hbar": 0.1, "certified": False, "status": "ok", "error": ""}])
    assert "false" in text.splitlines()[1]
