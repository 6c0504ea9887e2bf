"""End-to-end CLI contracts: exit codes, file outputs, determinism."""
import numpy as np
import pytest

from chtumor.cli import main
from chtumor.storage import SERIES_HEADER, read_field_snapshot


def write_config(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def base_config(out_dir, **overrides):
    values = {
        "P": 1.0, "A": 1.0, "B": 1.0, "C": 0.5, "sigma_s": 0.5,
        "h_star": 0.5, "phi_star": -2.0,
        "dim": 1, "cells": "16", "lengths": "1.0",
        "dt": 0.01, "t_end": 0.1, "monitor_stride": 5,
        "initial": "kind = constant\nphi0 = 0.2\nsigma0 = 0.5",
        "snapshot_stride": 0,
        "extra_output": "",
    }
    values.update(overrides)
    return f"""
[params]
P = {values['P']}
A = {values['A']}
B = {values['B']}
C = {values['C']}
sigma_s = {values['sigma_s']}

[potential]
kind = quartic

[h]
h_star = {values['h_star']}
phi_star = {values['phi_star']}

[grid]
dim = {values['dim']}
cells = {values['cells']}
lengths = {values['lengths']}

[scheme]
dt = {values['dt']}
t_end = {values['t_end']}
monitor_stride = {values['monitor_stride']}

[initial]
{values['initial']}

[output]
dir = {out_dir}
snapshot_stride = {values['snapshot_stride']}
{values['extra_output']}
"""


class TestCheckParams:
    def test_dissipative_exits_zero_and_prints_t1(self, tmp_path, capsys):
        cfg = write_config(tmp_path, base_config(tmp_path / "out"))
        assert main(["check-params", "--config", cfg]) == 0
        out = capsys.readouterr().out
        assert "verdict: dissipative" in out
        assert "0.924196" in out  # T1 at the largest admissible epsilon

    def test_zero_plateau_exits_two(self, tmp_path, capsys):
        cfg = write_config(tmp_path, base_config(tmp_path / "out", h_star=0.0, phi_star=-1.0))
        assert main(["check-params", "--config", cfg]) == 2
        out = capsys.readouterr().out
        assert "has_plateau_margin" in out and "VIOLATED" in out
        assert "verdict: not dissipative" in out

    def test_malformed_config_exits_one(self, tmp_path):
        cfg = write_config(tmp_path, "[params]\nP this is not a key value pair\n")
        assert main(["check-params", "--config", cfg]) == 1

    def test_missing_file_exits_one(self, tmp_path):
        assert main(["check-params", "--config", str(tmp_path / "nope.cfg")]) == 1

    def test_usage_error_exits_one(self, capsys):
        with pytest.raises(SystemExit) as err:
            main(["check-params"])  # --config missing
        assert err.value.code == 1


class TestRun:
    def test_zero_length_run_writes_single_row(self, tmp_path):
        out = tmp_path / "out"
        cfg = write_config(tmp_path, base_config(out, t_end=0.0))
        assert main(["run", "--config", cfg]) == 0
        lines = (out / "series.csv").read_text().splitlines()
        assert lines[0] == SERIES_HEADER
        assert len(lines) == 2
        assert lines[1].startswith("0,")

    def test_run_outputs_and_summary(self, tmp_path):
        out = tmp_path / "out"
        cfg = write_config(tmp_path, base_config(out, snapshot_stride=5,
                                                 extra_output="absorbing_radius = 10.0"))
        assert main(["run", "--config", cfg]) == 0
        assert (out / "series.csv").exists()
        summary = (out / "summary.txt").read_text()
        assert "regime = dissipative" in summary
        assert "absorption_entered = True" in summary
        field, t = read_field_snapshot(out / "final_phi.dat")
        assert t == pytest.approx(0.1)
        assert field.grid.cells == (16,)
        assert (out / "snap_phi_000000.dat").exists()

    def test_bitwise_deterministic_series(self, tmp_path):
        text = base_config(tmp_path / "out_a",
                           initial="kind = random\nmean = 0.0\namplitude = 0.2\nseed = 7")
        cfg_a = write_config(tmp_path, text, "a.cfg")
        assert main(["run", "--config", cfg_a]) == 0
        cfg_b = write_config(tmp_path, text.replace("out_a", "out_b"), "b.cfg")
        assert main(["run", "--config", cfg_b]) == 0
        a = (tmp_path / "out_a" / "series.csv").read_bytes()
        b = (tmp_path / "out_b" / "series.csv").read_bytes()
        assert a == b

    def test_seed_flag_changes_series(self, tmp_path):
        text = base_config(tmp_path / "out_a",
                           initial="kind = random\nmean = 0.0\namplitude = 0.2\nseed = 7")
        cfg = write_config(tmp_path, text)
        assert main(["run", "--config", cfg]) == 0
        assert main(["run", "--config", cfg, "--out", str(tmp_path / "out_c"), "--seed", "8"]) == 0
        a = (tmp_path / "out_a" / "series.csv").read_bytes()
        c = (tmp_path / "out_c" / "series.csv").read_bytes()
        assert a != c

    def test_env_override_applies(self, tmp_path, monkeypatch):
        out = tmp_path / "out"
        cfg = write_config(tmp_path, base_config(out))
        monkeypatch.setenv("CHTUMOR_SCHEME_T_END", "0.0")
        assert main(["run", "--config", cfg]) == 0
        lines = (out / "series.csv").read_text().splitlines()
        assert len(lines) == 2  # zero-length run: header + initial row


class TestOde:
    def test_equilibrium_constant_columns(self, tmp_path):
        out = tmp_path / "out"
        cfg = write_config(tmp_path, base_config(
            out, initial="kind = constant\nphi0 = -1.0\nsigma0 = 0.5", t_end=5.0))
        assert main(["ode", "--config", cfg]) == 0
        rows = (out / "ode.csv").read_text().splitlines()
        assert rows[0] == "t,X,S"
        data = np.array([[float(v) for v in line.split(",")] for line in rows[1:]])
        assert np.max(np.abs(data[:, 1] + 1.0)) <= 1e-12
        assert np.max(np.abs(data[:, 2] - 0.5)) <= 1e-12

    def test_blowup_exits_three_with_monotone_columns(self, tmp_path):
        out = tmp_path / "out"
        cfg = write_config(tmp_path, base_config(
            out, B=0.5, C=1.0, h_star=1.0,
            initial="kind = constant\nphi0 = -3.0\nsigma0 = 1.0", t_end=100.0))
        assert main(["ode", "--config", cfg]) == 3
        regime = (out / "regime.txt").read_text()
        assert "regime = blowup" in regime
        assert "diverged = True" in regime
        rows = (out / "ode.csv").read_text().splitlines()[1:]
        data = np.array([[float(v) for v in line.split(",")] for line in rows])
        assert np.all(np.diff(data[:, 1]) < 0.0)
        assert np.all(np.diff(data[:, 2]) > 0.0)

    def test_strip_reported_in_dissipative_regime(self, tmp_path):
        out = tmp_path / "out"
        cfg = write_config(tmp_path, base_config(
            out, initial="kind = constant\nphi0 = 0.0\nsigma0 = 0.5", t_end=2.0))
        assert main(["ode", "--config", cfg]) == 0
        regime = (out / "regime.txt").read_text()
        assert "regime = dissipative" in regime
        assert "invariant_strip = [0.33333333333333331, 0.66666666666666663]" in regime


class TestSweep:
    def test_plateau_sweep_band_structure(self, tmp_path):
        out = tmp_path / "out"
        text = base_config(out) + "\n[sweep]\naxis1 = h_star:0.0:1.0:6\naction = classify_only\n"
        cfg = write_config(tmp_path, text)
        assert main(["sweep", "--config", cfg]) == 0
        lines = (out / "regime_map.csv").read_text().splitlines()
        assert lines[0] == ("h_star,regime,has_plateau_margin,limit_below_one,"
                            "apoptosis_margin,superquadratic,diverged,error")
        tags = [line.split(",")[1] for line in lines[1:]]
        assert tags[0] == "frozen_mass"
        assert tags[1:5] == ["dissipative"] * 4
        assert tags[5] == "indeterminate"  # upper limit reaches 1 at h_star = 1

    def test_single_point_sweep_matches_check_params(self, tmp_path, capsys):
        out = tmp_path / "out"
        text = base_config(out) + "\n[sweep]\naxis1 = h_star:0.5:0.5:2\naction = classify_only\n"
        cfg = write_config(tmp_path, text)
        assert main(["sweep", "--config", cfg]) == 0
        lines = (out / "regime_map.csv").read_text().splitlines()[1:]
        assert all(line.split(",")[1] == "dissipative" for line in lines)
        assert main(["check-params", "--config", cfg]) == 0  # same config, same verdict

    def test_two_axis_row_order_and_threads(self, tmp_path):
        out = tmp_path / "out"
        text = base_config(out) + ("\n[sweep]\naxis1 = A:0.5:2.0:3\n"
                                   "axis2 = sigma_s:0.25:0.75:3\naction = ode_trajectory\n")
        cfg = write_config(tmp_path, text)
        assert main(["sweep", "--config", cfg, "--threads", "4"]) == 0
        lines = (out / "regime_map.csv").read_text().splitlines()
        assert len(lines) == 10
        first = np.array([float(line.split(",")[0]) for line in lines[1:]])
        second = np.array([float(line.split(",")[1]) for line in lines[1:]])
        # axis-major deterministic order regardless of executor scheduling
        assert np.array_equal(first, np.repeat([0.5, 1.25, 2.0], 3))
        assert np.array_equal(second, np.tile([0.25, 0.5, 0.75], 3))

    def test_two_axis_three_band_structure(self, tmp_path):
        # with P = 1, B = 1, C = 0.5, h_star = 0.5 the strip is
        # [sigma_s/1.5, sigma_s/0.75]; sweeping A across it walks through
        # growth_locked, indeterminate and dissipative bands
        out = tmp_path / "out"
        text = base_config(out) + ("\n[sweep]\naxis1 = A:0.2:0.8:3\n"
                                   "axis2 = sigma_s:0.36:0.75:2\naction = classify_only\n")
        cfg = write_config(tmp_path, text)
        assert main(["sweep", "--config", cfg]) == 0
        lines = (out / "regime_map.csv").read_text().splitlines()[1:]
        tags = {(round(float(line.split(",")[0]), 6), round(float(line.split(",")[1]), 6)):
                line.split(",")[2] for line in lines}
        assert tags[(0.2, 0.36)] == "growth_locked"
        assert tags[(0.5, 0.36)] == "dissipative"
        assert tags[(0.5, 0.75)] == "growth_locked"  # A/P sits exactly on the lower bound
        assert tags[(0.8, 0.75)] == "indeterminate"
        assert {"growth_locked", "indeterminate", "dissipative"} <= set(tags.values())

    def test_point_failures_recorded_in_row(self, tmp_path):
        out = tmp_path / "out"
        # dt*C*h_star = 3*h_star here, so points with h_star >= 1/3 violate the
        # positivity restriction; they must fail in-row, not abort the sweep
        text = base_config(out, dt=1.5, C=2.0, t_end=3.0, h_star=0.1)
        text += "\n[sweep]\naxis1 = h_star:0.1:1.0:4\naction = pde_run\n"
        cfg = write_config(tmp_path, text)
        assert main(["sweep", "--config", cfg]) == 0
        lines = (out / "regime_map.csv").read_text().splitlines()[1:]
        assert len(lines) == 4
        regimes = [line.split(",")[1] for line in lines]
        assert "error" in regimes
        assert any(r != "error" for r in regimes)
