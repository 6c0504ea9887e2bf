"""File formats: series CSV, ODE CSV, regime map CSV, field snapshots.

Floats are emitted with 17 significant digits (enough for a bit-exact
float64 round trip) and no locale-dependent formatting; headers are fixed
byte-for-byte so downstream tooling can rely on them.
"""
from __future__ import annotations

from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .diagnostics import MonitorRow
from .errors import ConfigurationError
from .grid import Field, GridSpec

SERIES_HEADER = "t,energy,x_magnitude,mass,sigma_min,sigma_max,grad_mu_sq,lap_phi_sq,env_lower,env_upper,violations"
ODE_HEADER = "t,X,S"
SNAPSHOT_MAGIC = "chtumor-field-v1"


def fmt_float(x: float) -> str:
    return format(float(x), ".17g")


def write_series_csv(path: Path | str, rows: Sequence[MonitorRow]) -> None:
    lines = [SERIES_HEADER]
    for r in rows:
        lines.append(",".join([
            fmt_float(r.t), fmt_float(r.energy), fmt_float(r.x_magnitude), fmt_float(r.mass),
            fmt_float(r.sigma_min), fmt_float(r.sigma_max), fmt_float(r.grad_mu_sq),
            fmt_float(r.lap_phi_sq), fmt_float(r.env_lower), fmt_float(r.env_upper),
            str(r.violations),
        ]))
    Path(path).write_text("\n".join(lines) + "\n")


def write_ode_csv(path: Path | str, t: np.ndarray, X: np.ndarray, S: np.ndarray) -> None:
    lines = [ODE_HEADER]
    for ti, xi, si in zip(t, X, S):
        lines.append(f"{fmt_float(ti)},{fmt_float(xi)},{fmt_float(si)}")
    Path(path).write_text("\n".join(lines) + "\n")


def write_regime_map_csv(path: Path | str, header: Sequence[str],
                         rows: Iterable[Sequence[str]]) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(row))
    Path(path).write_text("\n".join(lines) + "\n")


def write_field_snapshot(path: Path | str, field: Field, time: float) -> None:
    """Plain-text snapshot: header lines, then one value per line, row-major."""
    g = field.grid
    lines = [
        SNAPSHOT_MAGIC,
        f"dim {g.dim}",
        "cells " + " ".join(str(n) for n in g.cells),
        "lengths " + " ".join(fmt_float(x) for x in g.lengths),
        f"time {fmt_float(time)}",
    ]
    lines.extend(fmt_float(v) for v in field.values.ravel(order="C"))
    Path(path).write_text("\n".join(lines) + "\n")


def read_field_snapshot(path: Path | str) -> tuple[Field, float]:
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != SNAPSHOT_MAGIC:
        raise ConfigurationError(f"{path}: not a field snapshot (bad magic line)")
    try:
        dim = int(lines[1].split()[1])
        cells = tuple(int(x) for x in lines[2].split()[1:])
        lengths = tuple(float(x) for x in lines[3].split()[1:])
        time = float(lines[4].split()[1])
    except (IndexError, ValueError):
        raise ConfigurationError(f"{path}: malformed snapshot header") from None
    if len(cells) != dim or len(lengths) != dim:
        raise ConfigurationError(f"{path}: snapshot header is inconsistent")
    grid = GridSpec(cells, lengths)
    values = np.array([float(x) for x in lines[5:5 + grid.n_cells]])
    if values.size != grid.n_cells:
        raise ConfigurationError(f"{path}: expected {grid.n_cells} values, found {values.size}")
    return Field(grid, values.reshape(grid.cells)), time
