"""Command line driver: CSV schemas, exit codes, determinism across thread counts."""

import csv
import os
import subprocess
import sys

import numpy as np
import pytest

from metabcrb import (McEstimate, SubcarrierGrid, bcrb_closed_form,
                      default_scenario, load_scenario, select_subcarriers)
from metabcrb.cli import main

BASE_CFG = """
sensor.depth = 0.9
sensor.half_width = 1.0
sensor.shift_rate = 1.0
prior.mean = 0.0
prior.std = 1.0
channel.kappa = 1.0
noise.snr_db = 20.0
grid.center = 0.0
grid.spacing = 0.4
grid.count = 16
"""


@pytest.fixture
def cfg(tmp_path):
    path = tmp_path / "scenario.cfg"
    path.write_text(BASE_CFG)
    return str(path)


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


# --------------------------------------------------------------- sweep

def test_sweep_values_axis_and_schema(cfg, tmp_path):
    out = str(tmp_path / "sweep.csv")
    rc = main(["sweep", "--config", cfg, "--out", out,
               "--axis", "snr_db", "--values", "0,10,20"])
    assert rc == 0
    rows = _rows(out)
    assert [r["axis_value"] for r in rows] == [f"{v:.16e}" for v in (0.0, 10.0, 20.0)]
    assert rows[0]["curve_label"] == "base"
    sc = load_scenario(BASE_CFG)
    from metabcrb import snr_to_noise
    want = bcrb_closed_form(sc.with_noise(snr_to_noise(10.0)))
    assert float(rows[1]["bcrb"]) == want.bound
    assert float(rows[1]["first_term"]) == want.first_term
    assert float(rows[1]["coupling_term"]) == want.coupling_term


def test_sweep_fwhm_axis_sets_half_width(cfg, tmp_path):
    out = str(tmp_path / "sweep.csv")
    assert main(["sweep", "--config", cfg, "--out", out,
                 "--axis", "fwhm", "--values", "3.0"]) == 0
    row = _rows(out)[0]
    import dataclasses
    sc = load_scenario(BASE_CFG)
    sc = dataclasses.replace(sc, sensor=dataclasses.replace(sc.sensor, half_width=1.5))
    assert float(row["bcrb"]) == bcrb_closed_form(sc).bound


def test_sweep_range_and_curves(cfg, tmp_path):
    out = str(tmp_path / "sweep.csv")
    rc = main(["sweep", "--config", cfg, "--out", out, "--axis", "kappa",
               "--start", "1", "--stop", "100", "--points", "3", "--log",
               "--curve", "noise.snr_db=0.0", "--curve", "noise.snr_db=30.0"])
    assert rc == 0
    rows = _rows(out)
    assert len(rows) == 6
    labels = {r["curve_label"] for r in rows}
    assert labels == {"noise.snr_db=0.0", "noise.snr_db=30.0"}
    vals = sorted({float(r["axis_value"]) for r in rows})
    np.testing.assert_allclose(vals, [1.0, 10.0, 100.0], rtol=1e-12)


def test_sweep_subcarrier_count_axis(cfg, tmp_path):
    out = str(tmp_path / "sweep.csv")
    assert main(["sweep", "--config", cfg, "--out", out,
                 "--axis", "subcarrier_count", "--values", "1,4,64"]) == 0
    bounds = [float(r["bcrb"]) for r in _rows(out)]
    assert bounds[0] > bounds[1] > bounds[2]


def test_sweep_set_override(cfg, tmp_path):
    out = str(tmp_path / "sweep.csv")
    assert main(["sweep", "--config", cfg, "--out", out, "--axis", "depth",
                 "--values", "0.5", "--set", "channel.kappa=0.0"]) == 0
    row = _rows(out)[0]
    assert float(row["coupling_term"]) == 0.0


def test_sweep_usage_errors_exit_1(cfg, tmp_path):
    out = str(tmp_path / "x.csv")
    base = ["sweep", "--config", cfg, "--out", out, "--axis", "depth"]
    assert main(base + ["--values", "0.5", "--points", "3"]) == 1
    assert main(base + ["--start", "0.1"]) == 1
    assert main(base + ["--start", "0.1", "--stop", "1.0", "--points", "1"]) == 1
    assert main(base + ["--start", "-1", "--stop", "1", "--points", "3", "--log"]) == 1
    assert main(base + ["--values", "0.5", "--set", "bogus.key=1"]) == 1
    assert main(["sweep", "--config", cfg, "--out", out,
                 "--axis", "subcarrier_count", "--values", "2.5"]) == 1


def test_sweep_is_deterministic_across_thread_counts(cfg, tmp_path, monkeypatch):
    args = ["sweep", "--config", cfg, "--out", "", "--axis", "snr_db",
            "--start", "-5", "--stop", "25", "--points", "7",
            "--curve", "channel.kappa=0.0", "--curve", "channel.kappa=4.0"]
    outputs = []
    for threads in ("1", "4"):
        out = str(tmp_path / f"sweep_{threads}.csv")
        args[4] = out
        monkeypatch.setenv("METABCRB_THREADS", threads)
        assert main(args) == 0
        outputs.append(open(out, "rb").read())
    assert outputs[0] == outputs[1]


def test_bad_thread_env_exits_1(cfg, tmp_path, monkeypatch):
    monkeypatch.setenv("METABCRB_THREADS", "lots")
    assert main(["sweep", "--config", cfg, "--out", str(tmp_path / "x.csv"),
                 "--axis", "depth", "--values", "0.5"]) == 1


def test_sweep_svg_written(cfg, tmp_path):
    out = tmp_path / "sweep.csv"
    assert main(["sweep", "--config", cfg, "--out", str(out), "--axis", "snr_db",
                 "--values", "0,20", "--svg"]) == 0
    svg = out.with_suffix(".svg")
    assert svg.exists()
    body = svg.read_text()
    assert body.startswith("<svg") and "polyline" in body


# --------------------------------------------------------------- validate

def test_validate_schema_and_agreement(cfg, tmp_path):
    out = str(tmp_path / "val.csv")
    rc = main(["validate", "--config", cfg, "--out", out,
               "--samples", "50000", "--seed", "3", "--dense-check"])
    assert rc == 0
    rows = _rows(out)
    assert [r["scenario_label"] for r in rows] == ["configured", "rayleigh", "det_los"]
    for row in rows[:2]:
        closed = float(row["closed_form"])
        assert float(row["schur_from_blocks"]) == pytest.approx(closed, rel=1e-12)
        assert float(row["dense_inverse"]) == pytest.approx(closed, rel=1e-10)
        assert abs(float(row["z_score"])) <= 4.0
    los = rows[2]
    assert los["schur_from_blocks"] == "" and los["dense_inverse"] == ""
    assert float(los["mc_std_err"]) == 0.0 and float(los["z_score"]) == 0.0


def test_validate_biased_oracle_exits_2(cfg, tmp_path, monkeypatch):
    import metabcrb.cli as cli_mod

    def biased(scenario, samples, seed=0):
        closed = bcrb_closed_form(scenario).bound
        return McEstimate(value=closed * 1.5, std_err=closed * 0.01, samples=samples)

    monkeypatch.setattr(cli_mod, "mc_bound", biased)
    rc = main(["validate", "--config", cfg, "--out", str(tmp_path / "val.csv"),
               "--samples", "1000"])
    assert rc == 2


def test_validate_los_config_has_single_deterministic_branch(tmp_path):
    path = tmp_path / "los.cfg"
    path.write_text(BASE_CFG + "channel.los = true\n")
    out = str(tmp_path / "val.csv")
    assert main(["validate", "--config", str(path), "--out", out, "--samples", "100"]) == 0
    rows = _rows(out)
    assert [r["scenario_label"] for r in rows] == ["configured", "det_los"]


# --------------------------------------------------------------- select

def test_select_matches_library_and_is_sorted(cfg, tmp_path):
    out = str(tmp_path / "sel.csv")
    assert main(["select", "--config", cfg, "--out", out, "--budget", "5"]) == 0
    rows = _rows(out)
    assert [int(r["rank"]) for r in rows] == [1, 2, 3, 4, 5]
    sc = load_scenario(BASE_CFG)
    picked = select_subcarriers(sc.grid, sc, 5)
    assert [float(r["frequency"]) for r in rows] == picked
    bounds = [float(r["bcrb"]) for r in rows]
    assert all(b2 < b1 for b1, b2 in zip(bounds, bounds[1:]))
    contribs = [float(r["contribution"]) for r in rows]
    assert all(c2 <= c1 + 1e-15 for c1, c2 in zip(contribs, contribs[1:]))


def test_select_budget_validation(cfg, tmp_path):
    out = str(tmp_path / "sel.csv")
    assert main(["select", "--config", cfg, "--out", out, "--budget", "0"]) == 1
    assert main(["select", "--config", cfg, "--out", out, "--budget", "17"]) == 1


# --------------------------------------------------------------- asymptotics

def test_asymptotics_report_all_checks_pass(cfg, tmp_path):
    out = str(tmp_path / "asym.csv")
    assert main(["asymptotics", "--config", cfg, "--out", out]) == 0
    rows = _rows(out)
    assert len(rows) >= 10
    assert all(r["status"] == "ok" for r in rows)
    names = {r["check"] for r in rows}
    assert any(n.startswith("slope_power_wide") for n in names)
    assert any(n.startswith("slope_power_narrow") for n in names)
    assert "wideband_slope_power_sum" in names
    assert "bound_depth_slope_wide" in names
    for r in rows:
        assert float(r["deviation"]) <= float(r["tolerance"])


# --------------------------------------------------------------- misc

def test_missing_config_exits_1(tmp_path):
    assert main(["select", "--config", str(tmp_path / "nope.cfg"),
                 "--out", str(tmp_path / "x.csv"), "--budget", "1"]) == 1


def test_bad_config_key_exits_1(tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text("sensor.bogus = 1\n")
    assert main(["sweep", "--config", str(path), "--out", str(tmp_path / "x.csv"),
                 "--axis", "depth", "--values", "0.5"]) == 1


def test_console_entry_point_runs():
    proc = subprocess.run([sys.executable, "-m", "metabcrb.cli", "--help"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "sweep" in proc.stdout and "asymptotics" in proc.stdout


def test_unknown_subcommand_exits_1():
    assert main(["frobnicate"]) == 1
