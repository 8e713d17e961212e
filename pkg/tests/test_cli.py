import csv
import json

import numpy as np
import pytest

from epor.cli import main
from epor.relocation import BETA_STAR

SMALL = {"hm": {"paths": 60}, "hedge": {"restarts": 2}, "oracle": {"paths": 20000}}


@pytest.fixture()
def small(tmp_path):
    p = tmp_path / "small.json"
    p.write_text(json.dumps(SMALL))
    return str(p)


def run(*argv):
    return main([str(a) for a in argv])


def read_json(path):
    return json.loads(path.read_text())


def test_price_and_schedule_ordering(tmp_path, small, capsys):
    out_b, out_l = tmp_path / "b", tmp_path / "l"
    assert run("price", "--preset", "bullet_baseline", "--config", small, "--out", out_b) == 0
    assert run("price", "--preset", "linear_baseline", "--config", small, "--out", out_l) == 0
    vb = read_json(out_b / "valuation.json")
    vl = read_json(out_l / "valuation.json")
    assert vb["value_bps"] > vl["value_bps"] > 0
    for key in ("baseline_bps", "adjustment_bps", "ci10_bps", "ci90_bps"):
        assert key in vb
    assert (out_b / "density.csv").is_file() and (out_b / "valuation_series.csv").is_file()
    assert "value_bps" in capsys.readouterr().out


def test_price_sweep(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"hm": {"paths": 40}, "epor": {"sweep": True, "strikes": [0.025, 0.035]}}))
    assert run("price", "--config", cfg, "--out", tmp_path) == 0
    rows = list(csv.DictReader((tmp_path / "sweep.csv").open()))
    assert len(rows) == 2
    assert float(rows[0]["value_bps"]) < float(rows[1]["value_bps"])


def test_calibrate_synthetic_window(tmp_path):
    assert run("calibrate", "--out", tmp_path) == 0
    rep = read_json(tmp_path / "calibration.json")
    assert rep["n_observations"] == 132 and rep["source"] == "synthetic"
    lines = (tmp_path / "observations.csv").read_text().splitlines()
    assert len(lines) == 133
    # the fitted coefficients sit within sampling error of the generating ones
    b = np.array(rep["logistic"]["beta_annual"])
    se = np.array(rep["logistic"]["std_err_annual"])
    assert np.all(np.abs(b - np.array(BETA_STAR)) <= 4 * se)
    assert set(rep["distribution"]) == {"normal", "lognormal", "shifted_exponential"}
    # the written data file reproduces the report when fed back in
    out2 = tmp_path / "again"
    assert run("calibrate", "--data", tmp_path / "observations.csv", "--out", out2) == 0
    np.testing.assert_allclose(read_json(out2 / "calibration.json")["logistic"]["beta_annual"], b, rtol=1e-9)


def test_calibrate_input_errors(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    assert run("calibrate", "--data", empty, "--out", tmp_path) == 2
    assert run("calibrate", "--data", tmp_path / "missing.csv", "--out", tmp_path) == 2
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"calibration": {"monthz": 3}}))
    assert run("calibrate", "--config", bad, "--out", tmp_path) == 2


def test_unknown_preset_and_threads(tmp_path):
    with pytest.raises(SystemExit) as exc:
        run("price", "--preset", "nope", "--out", tmp_path)
    assert exc.value.code == 2
    assert run("price", "--threads", 0, "--out", tmp_path) == 2


def test_hedge_then_shock(tmp_path, small):
    assert run("hedge", "--preset", "bullet_baseline", "--config", small, "--kind", "fxr_mim",
               "--out", tmp_path) == 0
    rep = read_json(tmp_path / "hedge_fxr_mim.json")
    np.testing.assert_allclose(rep["maturities"], [5 / 3, 5.0, 25 / 3], atol=1e-9)
    assert abs(rep["cost_over_value"] - 1) < 0.1
    for name in ("strategy_fxr_mim.csv", "strategy_fxr_mim_swaps.csv", "greeks_fxr_mim.csv"):
        assert (tmp_path / name).is_file()
    assert run("shock", "--preset", "bullet_baseline", "--config", small,
               "--strategy", tmp_path / "strategy_fxr_mim.csv", "--out", tmp_path) == 0
    rows = list(csv.reader((tmp_path / "shock_strategy_fxr_mim.csv").open()))
    assert len(rows) == 1 + (3**5 - 1) + 2 * 5  # five quotes: full grid plus single 50bp shocks


def test_shock_missing_strategy(tmp_path):
    assert run("shock", "--strategy", tmp_path / "none.csv", "--out", tmp_path) == 2


def test_oracle_check(tmp_path, small):
    assert run("oracle-check", "--config", small, "--out", tmp_path) == 0
    rows = list(csv.DictReader((tmp_path / "oracle.csv").open()))
    assert [float(r["K"]) for r in rows] == [0.025, 0.03, 0.035]
    assert all(abs(float(r["z"])) < 4 for r in rows)
    assert all(int(r["n_paths"]) == 20000 for r in rows)


def test_repeat_runs_are_byte_identical(tmp_path, small):
    for d in ("a", "b"):
        assert run("price", "--config", small, "--seed", 5, "--out", tmp_path / d) == 0
    for name in ("valuation.json", "valuation_series.csv", "density.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
