"""Config parsing, serialization round trips, env overrides, snapshots."""
import numpy as np
import pytest

from chtumor import ConfigurationError, Field, GridSpec
from chtumor.config import (
    parse_run_config,
    parse_sweep_config,
    serialize_run_config,
    serialize_sweep_config,
)
from chtumor.storage import read_field_snapshot, write_field_snapshot

BASE = """
[params]
P = 1.0
A = 1.0
B = 1.0
C = 0.5
sigma_s = 0.5

[potential]
kind = quartic

[h]
h_star = 0.5
phi_star = -2.0

[grid]
dim = 2
cells = 8 12
lengths = 1.0 1.5

[scheme]
dt = 0.01
t_end = 0.25
monitor_stride = 5

[initial]
kind = random
mean = 0.0
amplitude = 0.1
seed = 42

[output]
dir = out
snapshot_stride = 2
"""

SWEEP = BASE + """
[sweep]
axis1 = h_star:0.0:1.0:6
action = classify_only
"""


class TestParse:
    def test_basic_fields(self):
        cfg = parse_run_config(BASE)
        assert cfg.params.P == 1.0 and cfg.params.sigma_s == 0.5
        assert cfg.cells == (8, 12)
        assert cfg.lengths == (1.0, 1.5)
        assert cfg.scheme.dt == 0.01
        assert cfg.scheme.stabilization == "auto"
        assert cfg.initial_kind == "random"
        assert cfg.seed == 42
        assert cfg.absorbing_radius is None

    def test_defaults_applied(self):
        cfg = parse_run_config(BASE)
        assert cfg.scheme.linear_tol == 1e-8
        assert cfg.envelope_tol == 1e-3

    def test_single_cell_count_broadcasts(self):
        cfg = parse_run_config(BASE.replace("cells = 8 12", "cells = 8"))
        assert cfg.cells == (8, 8)

    def test_objects_construct(self):
        cfg = parse_run_config(BASE)
        state = cfg.initial_state()
        assert state.grid == GridSpec((8, 12), (1.0, 1.5))

    @pytest.mark.parametrize("needle,replacement", [
        ("P = 1.0", "P = banana"),
        ("P = 1.0", "P = -3"),
        ("sigma_s = 0.5", "sigma_s = 1.5"),
        ("kind = quartic", "kind = logarithmic"),
        ("dt = 0.01", "dt = -1"),
        ("h_star = 0.5", "h_star = -0.5"),
        ("[params]", "[parameters]"),
        ("mean = 0.0", "typo_key = 0.0"),
    ])
    def test_rejects_bad_inputs(self, needle, replacement):
        with pytest.raises(ConfigurationError):
            parse_run_config(BASE.replace(needle, replacement))

    def test_missing_required_key(self):
        broken = BASE.replace("P = 1.0\n", "")
        with pytest.raises(ConfigurationError, match=r"\[params\] P"):
            parse_run_config(broken)

    def test_positivity_splitting_guard(self):
        # dt*C*h_star = 5 * 0.5 * 0.5 = 1.25 >= 1
        with pytest.raises(ConfigurationError, match="dt\\*C\\*h_star"):
            parse_run_config(BASE.replace("dt = 0.01", "dt = 5.0"))

    def test_custom_potential_coeffs(self):
        text = BASE.replace("kind = quartic", "kind = custom\nscale = 2.0\nwell = 1.5")
        cfg = parse_run_config(text)
        assert cfg.potential_coeffs == (2.0, 1.5)
        assert cfg.potential().kind == "custom"


class TestRoundTrip:
    @pytest.mark.parametrize("mutate", [
        lambda t: t,
        lambda t: t.replace("kind = quartic", "kind = piecewise_demo"),
        lambda t: t.replace("kind = quartic", "kind = custom\nscale = 2.0\nwell = 1.5"),
        lambda t: t.replace("kind = random\nmean = 0.0\namplitude = 0.1",
                            "kind = tanh_interface\nwidth = 0.07\nsigma0 = 0.625"),
        lambda t: t + "\n",
    ])
    def test_run_config(self, mutate):
        cfg = parse_run_config(mutate(BASE))
        again = parse_run_config(serialize_run_config(cfg))
        assert again == cfg

    def test_sweep_config(self):
        cfg = parse_sweep_config(SWEEP)
        again = parse_sweep_config(serialize_sweep_config(cfg))
        assert again == cfg

    def test_irrational_floats_survive(self):
        text = BASE.replace("dt = 0.01", "dt = 0.0012345678901234567")
        cfg = parse_run_config(text)
        again = parse_run_config(serialize_run_config(cfg))
        assert again.scheme.dt == cfg.scheme.dt


class TestEnvOverrides:
    def test_override_scalar(self):
        cfg = parse_run_config(BASE, environ={"CHTUMOR_SCHEME_DT": "0.005"})
        assert cfg.scheme.dt == 0.005

    def test_override_rate_constant(self):
        cfg = parse_run_config(BASE, environ={"CHTUMOR_PARAMS_B": "2.0"})
        assert cfg.params.B == 2.0

    def test_override_with_underscored_key(self):
        cfg = parse_run_config(BASE, environ={"CHTUMOR_PARAMS_SIGMA_S": "0.25"})
        assert cfg.params.sigma_s == 0.25

    def test_unrelated_env_ignored(self):
        cfg = parse_run_config(BASE, environ={"HOME": "/root", "CHTUMOR_H_H_STAR": "0.25"})
        assert cfg.h_star == 0.25

    def test_bad_override_rejected(self):
        with pytest.raises(ConfigurationError):
            parse_run_config(BASE, environ={"CHTUMOR_NOWHERE_KEY": "1"})


class TestSweepConfig:
    def test_axis_values(self):
        cfg = parse_sweep_config(SWEEP)
        assert [a.name for a in cfg.axes] == ["h_star"]
        assert cfg.axes[0].values() == pytest.approx([0.0, 0.2, 0.4, 0.6, 0.8, 1.0])

    def test_two_axes(self):
        text = SWEEP.replace("action = classify_only",
                             "axis2 = A:0.5:2.0:4\naction = classify_only")
        cfg = parse_sweep_config(text)
        assert len(cfg.axes) == 2

    @pytest.mark.parametrize("axis", [
        "P:0.0:1.0:3",        # positivity violated at the low end
        "sigma_s:0.1:1.0:3",  # must stay strictly below 1
        "phi_star:-3:-0.5:3", # must stay at or below -1
        "h_star:0:1:1",       # count too small
        "Q:0:1:3",            # not sweepable
        "h_star:1:0:3",       # reversed range
    ])
    def test_rejects_bad_axes(self, axis):
        with pytest.raises(ConfigurationError):
            parse_sweep_config(SWEEP.replace("axis1 = h_star:0.0:1.0:6", f"axis1 = {axis}"))

    def test_requires_axis(self):
        with pytest.raises(ConfigurationError):
            parse_sweep_config(BASE + "\n[sweep]\naction = classify_only\n")


class TestSnapshots:
    def test_round_trip_bitwise(self, tmp_path):
        g = GridSpec((5, 7), (1.0, 2.0))
        rng = np.random.default_rng(0)
        f = Field(g, rng.standard_normal(g.cells) * 1e3)
        path = tmp_path / "snap.dat"
        write_field_snapshot(path, f, time=3.25)
        back, t = read_field_snapshot(path)
        assert t == 3.25
        assert back.grid == g
        assert np.array_equal(back.values, f.values), "snapshot round trip must be bitwise"

    def test_rejects_corrupt_header(self, tmp_path):
        path = tmp_path / "bad.dat"
        path.write_text("not-a-snapshot\n1\n2\n")
        with pytest.raises(ConfigurationError):
            read_field_snapshot(path)
