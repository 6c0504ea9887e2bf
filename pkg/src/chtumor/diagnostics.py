"""Trajectory instrumentation: energy, phase-space magnitude, envelopes, mass.

A MonitorRow is the per-sample record the time stepper emits; its layout
matches the series CSV column order fixed in the CLI module.  The
phase-space magnitude combines the H1 norm of phi, the sup norm of sigma
and the integral of |psi(phi)| (not a true norm: the potential term is
nonlinear), and is what the absorbing-ball detector operates on.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import grid as gridmod
from .grid import Field
from .model import Params, Potential, Proliferation, envelope_lower, envelope_upper


@dataclass(frozen=True)
class MonitorRow:
    t: float
    energy: float
    x_magnitude: float
    mass: float
    sigma_min: float
    sigma_max: float
    grad_mu_sq: float
    lap_phi_sq: float
    env_lower: float
    env_upper: float  # nan when B - C*h_star <= 0
    violations: int


@dataclass(frozen=True)
class AbsorptionReport:
    entered: bool
    entry_time: float | None
    ball_radius_used: float
    post_entry_max_magnitude: float


def energy(phi: Field, pot: Potential) -> float:
    """Interfacial plus configurational energy: 0.5*||grad phi||^2 + int psi(phi)."""
    bulk = float(np.sum(pot.psi(phi.values))) * phi.grid.cell_volume
    return 0.5 * gridmod.grad_sq_norm(phi) + bulk


def x_magnitude(phi: Field, sigma: Field, pot: Potential) -> float:
    """Phase-space magnitude ||phi||_V + max|sigma| + int |psi(phi)|.

    ||phi||_V is the discrete H1 norm (L2 norm squared plus the face-gradient
    seminorm squared, under a square root).  Builtin potentials have psi >= 0,
    so the absolute value only matters for custom potentials with negative
    parts.
    """
    if phi.grid != sigma.grid:
        raise ValueError("phi and sigma live on different grids")
    v_norm = math.sqrt(gridmod.inner(phi, phi) + gridmod.grad_sq_norm(phi))
    psi_l1 = float(np.sum(np.abs(pot.psi(phi.values)))) * phi.grid.cell_volume
    return v_norm + float(np.max(np.abs(sigma.values))) + psi_l1


def check_sigma_envelope(sigma: Field, t: float, params: Params,
                         prolif: Proliferation, tol: float) -> int:
    """Count cells outside the comparison envelopes at time t.

    The lower envelope is always valid; the upper one exists only when
    B - C*h_star > 0 and is skipped otherwise.
    """
    lo = envelope_lower(params, t)
    bad = sigma.values < lo - tol
    if params.B - params.C * prolif.h_star > 0.0:
        hi = envelope_upper(params, prolif, t)
        bad = bad | (sigma.values > hi + tol)
    return int(np.count_nonzero(bad))


def monitor_row(t: float, phi: Field, mu: Field, sigma: Field, params: Params,
                pot: Potential, prolif: Proliferation, envelope_tol: float = 1e-3) -> MonitorRow:
    """Assemble one diagnostics record for the current state."""
    has_upper = params.B - params.C * prolif.h_star > 0.0
    lap_phi = gridmod.laplacian_neumann(phi)
    return MonitorRow(
        t=float(t),
        energy=energy(phi, pot),
        x_magnitude=x_magnitude(phi, sigma, pot),
        mass=gridmod.mean(phi),
        sigma_min=float(sigma.values.min()),
        sigma_max=float(sigma.values.max()),
        grad_mu_sq=gridmod.grad_sq_norm(mu),
        lap_phi_sq=gridmod.inner(lap_phi, lap_phi),
        env_lower=envelope_lower(params, t),
        env_upper=envelope_upper(params, prolif, t) if has_upper else math.nan,
        violations=check_sigma_envelope(sigma, t, params, prolif, envelope_tol),
    )


def absorption(series: Sequence[MonitorRow], radius: float) -> AbsorptionReport:
    """Detect entry into the ball of the given magnitude radius.

    Entry time is the first sample time after which the magnitude never
    exceeds the radius again for the remainder of the series.
    """
    if not series:
        raise ValueError("absorption needs a nonempty monitor series")
    mags = np.array([row.x_magnitude for row in series])
    suffix_max = np.maximum.accumulate(mags[::-1])[::-1]
    inside = np.nonzero(suffix_max <= radius)[0]
    if inside.size == 0:
        return AbsorptionReport(False, None, radius, float(suffix_max[0]))
    k = int(inside[0])
    return AbsorptionReport(True, float(series[k].t), radius, float(suffix_max[k]))
