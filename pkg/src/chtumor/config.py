"""Run and sweep configuration: flat key=value text in bracketed sections.

The format is diffable and dependency-free:

    [params]
    P = 1.0
    ...
    [scheme]
    dt = 1e-3

Sections are [params], [potential], [h], [grid], [scheme], [initial],
[output] and, for sweeps, [sweep].  Any key can be overridden through the
environment as CHTUMOR_<SECTION>_<KEY> (for example CHTUMOR_SCHEME_DT).
Every referenced module's preconditions are validated at parse time, so a
config that parses will also construct.
"""
from __future__ import annotations

import configparser
import io
import os
from dataclasses import dataclass

from .dynamics import SchemeConfig, SimState, make_initial
from .errors import ConfigurationError
from .grid import GridSpec
from .model import (
    Params,
    Potential,
    Proliferation,
    make_demo_potential,
    make_polynomial_double_well,
    make_proliferation,
    make_quartic_potential,
)

ENV_PREFIX = "CHTUMOR_"

SECTIONS = ("params", "potential", "h", "grid", "scheme", "initial", "output", "sweep")

_KNOWN_KEYS = {
    "params": {"P", "A", "B", "C", "sigma_s"},
    "potential": {"kind", "scale", "well"},
    "h": {"h_star", "phi_star"},
    "grid": {"dim", "cells", "lengths"},
    "scheme": {"dt", "stabilization", "linear_tol", "max_steps", "monitor_stride", "t_end"},
    "initial": {"kind", "phi0", "sigma0", "width", "normal_axis", "mean", "amplitude", "seed"},
    "output": {"dir", "snapshot_stride", "absorbing_radius", "envelope_tol"},
    "sweep": {"axis1", "axis2", "action"},
}

POTENTIAL_KINDS = ("quartic", "piecewise_demo", "custom")
INITIAL_KINDS = ("constant", "tanh_interface", "random")
SWEEP_ACTIONS = ("classify_only", "ode_trajectory", "pde_run")

# parameters a sweep may vary, with their admissible ranges
_SWEEPABLE = {
    "P": (0.0, None, True),        # (lower bound, upper bound, strict lower)
    "A": (0.0, None, True),
    "B": (0.0, None, True),
    "C": (0.0, None, True),
    "sigma_s": (0.0, 1.0, True),
    "h_star": (0.0, None, False),
    "phi_star": (None, -1.0, False),
}


def _fmt(x) -> str:
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


class _Raw:
    """Raw string table with section/key-aware error reporting."""

    def __init__(self, data: dict[str, dict[str, str]]):
        self.data = data

    def has(self, section: str, key: str) -> bool:
        return key in self.data.get(section, {})

    def get(self, section: str, key: str, default=None, required: bool = False) -> str | None:
        sec = self.data.get(section, {})
        if key not in sec:
            if required:
                raise ConfigurationError(f"[{section}] {key}: missing required key")
            return default
        return sec[key]

    def get_float(self, section: str, key: str, default=None, required: bool = False) -> float | None:
        raw = self.get(section, key, None, required)
        if raw is None:
            return default
        try:
            return float(raw)
        except ValueError:
            raise ConfigurationError(f"[{section}] {key}: expected a number, got {raw!r}") from None

    def get_int(self, section: str, key: str, default=None, required: bool = False) -> int | None:
        raw = self.get(section, key, None, required)
        if raw is None:
            return default
        try:
            return int(raw)
        except ValueError:
            raise ConfigurationError(f"[{section}] {key}: expected an integer, got {raw!r}") from None

    def get_choice(self, section: str, key: str, choices, default=None, required: bool = False) -> str | None:
        raw = self.get(section, key, None, required)
        if raw is None:
            return default
        if raw not in choices:
            raise ConfigurationError(f"[{section}] {key}: expected one of {choices}, got {raw!r}")
        return raw


def _read_raw(text: str) -> _Raw:
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str  # keys are case-sensitive
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigurationError(f"config parse error: {exc}") from None
    data: dict[str, dict[str, str]] = {}
    for section in parser.sections():
        if section not in SECTIONS:
            raise ConfigurationError(f"unknown section [{section}] (expected one of {SECTIONS})")
        for key in parser.options(section):
            if key not in _KNOWN_KEYS[section]:
                raise ConfigurationError(f"[{section}] {key}: unknown key")
        data[section] = {k: v.strip() for k, v in parser.items(section)}
    return _Raw(data)


def apply_env_overrides(raw: _Raw, environ=None) -> None:
    """Fold CHTUMOR_<SECTION>_<KEY> environment variables into the raw table."""
    environ = os.environ if environ is None else environ
    for name, value in environ.items():
        if not name.startswith(ENV_PREFIX):
            continue
        body = name[len(ENV_PREFIX):]
        if "_" not in body:
            raise ConfigurationError(f"environment override {name}: expected {ENV_PREFIX}<SECTION>_<KEY>")
        section, key = body.split("_", 1)
        section = section.lower()
        key = key.lower()
        if section not in SECTIONS:
            raise ConfigurationError(f"environment override {name}: unknown section {section!r}")
        if section == "params" and key in ("p", "a", "b", "c"):
            key = key.upper()
        raw.data.setdefault(section, {})[key] = value


def _parse_int_tuple(raw: str, count: int, what: str) -> tuple[int, ...]:
    parts = [p for p in raw.replace(",", " ").split() if p]
    try:
        vals = tuple(int(p) for p in parts)
    except ValueError:
        raise ConfigurationError(f"{what}: expected integers, got {raw!r}") from None
    if len(vals) == 1:
        vals = vals * count
    if len(vals) != count:
        raise ConfigurationError(f"{what}: expected {count} values, got {len(vals)}")
    return vals


def _parse_float_tuple(raw: str, count: int, what: str) -> tuple[float, ...]:
    parts = [p for p in raw.replace(",", " ").split() if p]
    try:
        vals = tuple(float(p) for p in parts)
    except ValueError:
        raise ConfigurationError(f"{what}: expected numbers, got {raw!r}") from None
    if len(vals) == 1:
        vals = vals * count
    if len(vals) != count:
        raise ConfigurationError(f"{what}: expected {count} values, got {len(vals)}")
    return vals


@dataclass
class RunConfig:
    params: Params
    potential_kind: str
    potential_coeffs: tuple[float, float] | None
    h_star: float
    phi_star: float
    cells: tuple[int, ...]
    lengths: tuple[float, ...]
    scheme: SchemeConfig
    t_end: float
    initial_kind: str
    initial_params: dict
    seed: int
    out_dir: str
    snapshot_stride: int
    absorbing_radius: float | None
    envelope_tol: float

    # -- object factories ---------------------------------------------------

    def potential(self) -> Potential:
        if self.potential_kind == "quartic":
            return make_quartic_potential()
        if self.potential_kind == "piecewise_demo":
            return make_demo_potential()
        scale, well = self.potential_coeffs
        return make_polynomial_double_well(scale, well)

    def proliferation(self) -> Proliferation:
        return make_proliferation(self.h_star, self.phi_star)

    def grid(self) -> GridSpec:
        return GridSpec(self.cells, self.lengths)

    def initial_state(self) -> SimState:
        kw = dict(self.initial_params)
        if self.initial_kind == "random":
            kw["seed"] = self.seed
        return make_initial(self.grid(), self.potential(), self.initial_kind, **kw)


@dataclass
class SweepAxis:
    name: str
    lo: float
    hi: float
    count: int

    def values(self) -> list[float]:
        return [self.lo + (self.hi - self.lo) * i / (self.count - 1) for i in range(self.count)]


@dataclass
class SweepConfig:
    base: RunConfig
    axes: tuple[SweepAxis, ...]
    action: str


def parse_run_config(text: str, environ=None) -> RunConfig:
    raw = _read_raw(text)
    apply_env_overrides(raw, environ)
    return _build_run_config(raw)


def parse_sweep_config(text: str, environ=None) -> SweepConfig:
    raw = _read_raw(text)
    apply_env_overrides(raw, environ)
    base = _build_run_config(raw)
    axes = []
    for key in ("axis1", "axis2"):
        spec = raw.get("sweep", key)
        if spec is None:
            continue
        axes.append(_parse_axis(key, spec))
    if not axes:
        raise ConfigurationError("[sweep] axis1: missing required key")
    action = raw.get_choice("sweep", "action", SWEEP_ACTIONS, required=True)
    return SweepConfig(base=base, axes=tuple(axes), action=action)


def _parse_axis(key: str, spec: str) -> SweepAxis:
    parts = spec.split(":")
    if len(parts) != 4:
        raise ConfigurationError(f"[sweep] {key}: expected name:min:max:count, got {spec!r}")
    name = parts[0].strip()
    if name not in _SWEEPABLE:
        raise ConfigurationError(f"[sweep] {key}: cannot sweep {name!r} (one of {sorted(_SWEEPABLE)})")
    try:
        lo, hi = float(parts[1]), float(parts[2])
        count = int(parts[3])
    except ValueError:
        raise ConfigurationError(f"[sweep] {key}: malformed range in {spec!r}") from None
    if count < 2:
        raise ConfigurationError(f"[sweep] {key}: count must be >= 2, got {count}")
    if hi < lo:
        raise ConfigurationError(f"[sweep] {key}: max < min in {spec!r}")
    lo_bound, hi_bound, strict_lo = _SWEEPABLE[name]
    if lo_bound is not None and (lo < lo_bound or (strict_lo and lo <= lo_bound)):
        raise ConfigurationError(f"[sweep] {key}: range for {name} must stay above {lo_bound}")
    if hi_bound is not None and hi > hi_bound - (1e-12 if name == "sigma_s" else 0.0):
        raise ConfigurationError(f"[sweep] {key}: range for {name} must stay below {hi_bound}")
    return SweepAxis(name=name, lo=lo, hi=hi, count=count)


def _build_run_config(raw: _Raw) -> RunConfig:
    params = Params(
        P=raw.get_float("params", "P", required=True),
        A=raw.get_float("params", "A", required=True),
        B=raw.get_float("params", "B", required=True),
        C=raw.get_float("params", "C", required=True),
        sigma_s=raw.get_float("params", "sigma_s", required=True),
    )

    potential_kind = raw.get_choice("potential", "kind", POTENTIAL_KINDS, default="quartic")
    potential_coeffs = None
    if potential_kind == "custom":
        potential_coeffs = (raw.get_float("potential", "scale", required=True),
                            raw.get_float("potential", "well", required=True))
        make_polynomial_double_well(*potential_coeffs)  # validate now

    h_star = raw.get_float("h", "h_star", required=True)
    phi_star = raw.get_float("h", "phi_star", default=-2.0)
    prolif = make_proliferation(h_star, phi_star)  # validates the plateau constraints

    dim = raw.get_int("grid", "dim", default=1)
    if dim not in (1, 2, 3):
        raise ConfigurationError(f"[grid] dim: must be 1, 2 or 3, got {dim}")
    cells = _parse_int_tuple(raw.get("grid", "cells", default="64"), dim, "[grid] cells")
    lengths = _parse_float_tuple(raw.get("grid", "lengths", default="1.0"), dim, "[grid] lengths")
    GridSpec(cells, lengths)  # validate now

    stab_raw = raw.get("scheme", "stabilization", default="auto")
    stabilization: float | str
    if stab_raw == "auto":
        stabilization = "auto"
    else:
        try:
            stabilization = float(stab_raw)
        except ValueError:
            raise ConfigurationError(
                f"[scheme] stabilization: expected a number or 'auto', got {stab_raw!r}") from None
    scheme = SchemeConfig(
        dt=raw.get_float("scheme", "dt", required=True),
        stabilization=stabilization,
        linear_tol=raw.get_float("scheme", "linear_tol", default=1e-8),
        max_steps=raw.get_int("scheme", "max_steps", default=10_000_000),
        monitor_stride=raw.get_int("scheme", "monitor_stride", default=100),
    )
    t_end = raw.get_float("scheme", "t_end", default=1.0)
    if t_end < 0.0:
        raise ConfigurationError(f"[scheme] t_end: must be nonnegative, got {t_end}")
    if scheme.dt * params.C * h_star >= 1.0:
        raise ConfigurationError(
            f"[scheme] dt: dt*C*h_star = {scheme.dt * params.C * h_star:g} must be < 1")

    initial_kind = raw.get_choice("initial", "kind", INITIAL_KINDS, default="constant")
    initial_params: dict = {}
    if initial_kind == "constant":
        initial_params["phi0"] = raw.get_float("initial", "phi0", required=True)
        initial_params["sigma0"] = raw.get_float("initial", "sigma0", required=True)
    elif initial_kind == "tanh_interface":
        initial_params["width"] = raw.get_float("initial", "width", required=True)
        initial_params["sigma0"] = raw.get_float("initial", "sigma0", required=True)
        initial_params["normal_axis"] = raw.get_int("initial", "normal_axis", default=0)
    else:
        initial_params["mean"] = raw.get_float("initial", "mean", required=True)
        initial_params["amplitude"] = raw.get_float("initial", "amplitude", required=True)
        if raw.has("initial", "sigma0"):
            initial_params["sigma0"] = raw.get_float("initial", "sigma0")
    sigma0 = initial_params.get("sigma0")
    if sigma0 is not None and not 0.0 <= sigma0 <= 1.0:
        raise ConfigurationError(f"[initial] sigma0: must lie in [0, 1], got {sigma0}")
    seed = raw.get_int("initial", "seed", default=0)

    out_dir = raw.get("output", "dir", default="out")
    snapshot_stride = raw.get_int("output", "snapshot_stride", default=0)
    if snapshot_stride < 0:
        raise ConfigurationError(f"[output] snapshot_stride: must be >= 0, got {snapshot_stride}")
    absorbing_radius = raw.get_float("output", "absorbing_radius", default=None)
    if absorbing_radius is not None and absorbing_radius <= 0.0:
        raise ConfigurationError(f"[output] absorbing_radius: must be positive, got {absorbing_radius}")
    envelope_tol = raw.get_float("output", "envelope_tol", default=1e-3)

    _ = prolif  # constructed above purely for validation
    return RunConfig(
        params=params,
        potential_kind=potential_kind,
        potential_coeffs=potential_coeffs,
        h_star=h_star,
        phi_star=phi_star,
        cells=cells,
        lengths=lengths,
        scheme=scheme,
        t_end=t_end,
        initial_kind=initial_kind,
        initial_params=initial_params,
        seed=seed,
        out_dir=out_dir,
        snapshot_stride=snapshot_stride,
        absorbing_radius=absorbing_radius,
        envelope_tol=envelope_tol,
    )


def serialize_run_config(cfg: RunConfig) -> str:
    """Canonical text form; parse(serialize(cfg)) reproduces cfg exactly."""
    buf = io.StringIO()
    p = cfg.params
    buf.write("[params]\n")
    for key, val in (("P", p.P), ("A", p.A), ("B", p.B), ("C", p.C), ("sigma_s", p.sigma_s)):
        buf.write(f"{key} = {_fmt(val)}\n")
    buf.write("\n[potential]\n")
    buf.write(f"kind = {cfg.potential_kind}\n")
    if cfg.potential_coeffs is not None:
        buf.write(f"scale = {_fmt(cfg.potential_coeffs[0])}\n")
        buf.write(f"well = {_fmt(cfg.potential_coeffs[1])}\n")
    buf.write("\n[h]\n")
    buf.write(f"h_star = {_fmt(cfg.h_star)}\n")
    buf.write(f"phi_star = {_fmt(cfg.phi_star)}\n")
    buf.write("\n[grid]\n")
    buf.write(f"dim = {len(cfg.cells)}\n")
    buf.write(f"cells = {' '.join(str(n) for n in cfg.cells)}\n")
    buf.write(f"lengths = {' '.join(_fmt(x) for x in cfg.lengths)}\n")
    buf.write("\n[scheme]\n")
    buf.write(f"dt = {_fmt(cfg.scheme.dt)}\n")
    buf.write(f"stabilization = {_fmt(cfg.scheme.stabilization)}\n")
    buf.write(f"linear_tol = {_fmt(cfg.scheme.linear_tol)}\n")
    buf.write(f"max_steps = {cfg.scheme.max_steps}\n")
    buf.write(f"monitor_stride = {cfg.scheme.monitor_stride}\n")
    buf.write(f"t_end = {_fmt(cfg.t_end)}\n")
    buf.write("\n[initial]\n")
    buf.write(f"kind = {cfg.initial_kind}\n")
    for key, val in cfg.initial_params.items():
        buf.write(f"{key} = {_fmt(val)}\n")
    buf.write(f"seed = {cfg.seed}\n")
    buf.write("\n[output]\n")
    buf.write(f"dir = {cfg.out_dir}\n")
    buf.write(f"snapshot_stride = {cfg.snapshot_stride}\n")
    if cfg.absorbing_radius is not None:
        buf.write(f"absorbing_radius = {_fmt(cfg.absorbing_radius)}\n")
    buf.write(f"envelope_tol = {_fmt(cfg.envelope_tol)}\n")
    return buf.getvalue()


def serialize_sweep_config(cfg: SweepConfig) -> str:
    text = serialize_run_config(cfg.base)
    lines = ["\n[sweep]"]
    for i, axis in enumerate(cfg.axes, start=1):
        lines.append(f"axis{i} = {axis.name}:{_fmt(axis.lo)}:{_fmt(axis.hi)}:{axis.count}")
    lines.append(f"action = {cfg.action}\n")
    return text + "\n".join(lines)
