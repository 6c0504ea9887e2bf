"""Time integration of the coupled phase/nutrient system.

One step of the linearly implicit stabilized scheme, at step size dt and
stabilization s:

  1. nutrient: split h = h+ - h- at the old phase and solve
         (I + dt*(-Lap) + dt*B + dt*C*h+) sigma_new
             = sigma_old + dt*B*sigma_s + dt*C*h- * sigma_old,
     so every decay term is implicit and the growth term explicit; the
     resulting matrix is an M-matrix, which is what keeps sigma >= 0.
  2. phase: treat the biharmonic term and the stabilization implicitly,
     the potential derivative explicitly:
         (I + dt*s*(-Lap) + dt*Lap^2) phi_new
             = phi_old + dt*Lap(psi'(phi_old) - s*phi_old)
               + dt*(P*sigma_new - A)*h(phi_old).
  3. chemical potential (a derived output of the scheme):
         mu_new = -Lap phi_new + s*(phi_new - phi_old) + psi'(phi_old).

The source uses the fresh nutrient (nutrient solved first) and lags h at
the old phase.  "auto" stabilization takes s = max psi''/2 over the range
the phase currently occupies, the classical sufficient choice for
stabilized semi-implicit schemes, recomputed every step.

Taking cell means of the phase update kills every Laplacian term (zero
column sums), leaving the discrete mass balance
mean(phi_new) = mean(phi_old) + dt*mean((P*sigma_new - A)*h(phi_old)):
the tumor mass is not conserved, it is driven by the source alone.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import grid as gridmod
from .diagnostics import MonitorRow, monitor_row
from .errors import ConfigurationError, DivergenceError
from .grid import Field, GridSpec
from .model import Params, Potential, Proliferation

BLOWUP_LIMIT = 1e6


@dataclass(frozen=True)
class SimState:
    """PDE state (phi, mu, sigma) at time t; all fields share one grid."""

    t: float
    phi: Field
    mu: Field
    sigma: Field

    def __post_init__(self):
        if self.phi.grid != self.mu.grid or self.phi.grid != self.sigma.grid:
            raise ConfigurationError("state fields live on different grids")

    @property
    def grid(self) -> GridSpec:
        return self.phi.grid


@dataclass(frozen=True)
class SchemeConfig:
    dt: float
    stabilization: float | str = "auto"
    linear_tol: float = 1e-8
    max_steps: int = 10_000_000
    monitor_stride: int = 100

    def __post_init__(self):
        if self.dt <= 0.0 or not math.isfinite(self.dt):
            raise ConfigurationError(f"dt must be positive, got {self.dt}")
        if not 0.0 < self.linear_tol < 1.0:
            raise ConfigurationError(f"linear_tol must lie in (0, 1), got {self.linear_tol}")
        if isinstance(self.stabilization, str):
            if self.stabilization != "auto":
                raise ConfigurationError(f"stabilization must be a number or 'auto', got {self.stabilization!r}")
        elif self.stabilization < 0.0:
            raise ConfigurationError(f"stabilization must be nonnegative, got {self.stabilization}")
        if self.max_steps < 1:
            raise ConfigurationError("max_steps must be at least 1")
        if self.monitor_stride < 1:
            raise ConfigurationError("monitor_stride must be at least 1")


@dataclass(frozen=True)
class TrajectoryReport:
    final_state: SimState
    rows: list[MonitorRow]
    steps_taken: int
    diverged: bool
    reason: str | None = None


def stabilization_parameter(pot: Potential, lo: float, hi: float,
                            samples: int = 257) -> float:
    """s = max(psi''/2, 0) sampled over a slightly padded value range.

    psi'' is evaluated by centered differences of psi', so only the
    decomposition functions are needed.
    """
    pad = 0.05 * (abs(lo) + abs(hi)) + 0.1
    r = np.linspace(lo - pad, hi + pad, samples)
    eps = 1e-5
    second = (np.asarray(pot.psi_prime(r + eps)) - np.asarray(pot.psi_prime(r - eps))) / (2.0 * eps)
    return max(0.0, 0.5 * float(second.max()))


def _resolve_stabilization(cfg: SchemeConfig, pot: Potential, phi: np.ndarray) -> float:
    if cfg.stabilization == "auto":
        return stabilization_parameter(pot, float(phi.min()), float(phi.max()))
    return float(cfg.stabilization)


def step(state: SimState, params: Params, pot: Potential, prolif: Proliferation,
         cfg: SchemeConfig) -> SimState:
    """Advance the state by one step of size cfg.dt.

    Valid in every parameter regime (no certificate needed); non-finite
    results abort with a snapshot of the offending iterate.
    """
    g = state.grid
    dt = cfg.dt
    phi = state.phi.values
    sigma = state.sigma.values

    hvals = prolif.h(phi)
    h_plus = np.maximum(hvals, 0.0)
    h_minus = np.maximum(-hvals, 0.0)

    diag = (1.0 + dt * params.B) + dt * params.C * h_plus
    rhs_sigma = sigma + dt * params.B * params.sigma_s + dt * params.C * h_minus * sigma
    sigma_new = gridmod.solve_shifted_laplacian(diag, dt, Field(g, rhs_sigma), cfg.linear_tol)

    s = _resolve_stabilization(cfg, pot, phi)
    source = (params.P * sigma_new.values - params.A) * hvals
    rhs_phi = phi + dt * gridmod.laplacian_array(
        np.asarray(pot.psi_prime(phi)) - s * phi, g.spacing) + dt * source
    phi_new = gridmod.solve_ch_linear(dt, s, Field(g, rhs_phi), cfg.linear_tol)

    mu_new = Field(g, -gridmod.laplacian_array(phi_new.values, g.spacing)
                   + s * (phi_new.values - phi) + np.asarray(pot.psi_prime(phi)))

    t_new = state.t + dt
    if not (np.all(np.isfinite(phi_new.values)) and np.all(np.isfinite(sigma_new.values))
            and np.all(np.isfinite(mu_new.values))):
        raise DivergenceError(
            f"non-finite values after step to t = {t_new:g}",
            snapshot={"t": t_new, "phi": phi_new.values, "mu": mu_new.values,
                      "sigma": sigma_new.values},
        )
    return SimState(t=t_new, phi=phi_new, mu=mu_new, sigma=sigma_new)


def run(initial: SimState, t_end: float, params: Params, pot: Potential,
        prolif: Proliferation, cfg: SchemeConfig,
        monitors: Sequence[Callable[[SimState], None]] | None = None,
        envelope_tol: float = 1e-3) -> TrajectoryReport:
    """March from initial.t to t_end, sampling diagnostics every monitor stride.

    A diagnostics row is always recorded at the initial time and after the
    final step.  Runs in non-dissipative regimes are permitted; when the
    phase exceeds the blow-up limit (or a step produces non-finite values)
    the run stops cleanly with the partial series and the diverged tag.
    Positivity of the nutrient update requires dt*C*h_star < 1, which is
    enforced here.
    """
    if t_end < initial.t:
        raise ConfigurationError(f"t_end = {t_end} lies before the initial time {initial.t}")
    if cfg.dt * params.C * prolif.h_star >= 1.0:
        raise ConfigurationError(
            f"dt*C*h_star = {cfg.dt * params.C * prolif.h_star:g} must be < 1 "
            "for the nutrient splitting to preserve positivity")

    n_steps = min(cfg.max_steps, math.ceil((t_end - initial.t) / cfg.dt - 1e-9))
    n_steps = max(n_steps, 0)

    def observe(s: SimState) -> None:
        rows.append(monitor_row(s.t, s.phi, s.mu, s.sigma, params, pot, prolif, envelope_tol))
        if monitors:
            for m in monitors:
                m(s)

    rows: list[MonitorRow] = []
    state = initial
    observe(state)
    diverged = False
    reason = None
    k = 0
    while k < n_steps:
        try:
            state = step(state, params, pot, prolif, cfg)
        except DivergenceError as exc:
            diverged = True
            reason = str(exc)
            break
        k += 1
        if state.phi.max_abs() > BLOWUP_LIMIT:
            diverged = True
            reason = f"phase magnitude exceeded {BLOWUP_LIMIT:g} at t = {state.t:g}"
            observe(state)
            break
        if k % cfg.monitor_stride == 0 or k == n_steps:
            observe(state)
    return TrajectoryReport(final_state=state, rows=rows, steps_taken=k,
                            diverged=diverged, reason=reason)


def make_initial(grid: GridSpec, pot: Potential, kind: str, *,
                 phi0: float | None = None, sigma0: float | None = None,
                 width: float | None = None, normal_axis: int = 0,
                 mean: float | None = None, amplitude: float | None = None,
                 seed: int = 0) -> SimState:
    """Build an initial state with a scheme-consistent chemical potential.

    kinds:
      constant        phi = phi0, sigma = sigma0
      tanh_interface  phi = tanh profile across the box midplane along
                      normal_axis (values in (-1, 1)), sigma = sigma0
      random          phi = mean + amplitude*uniform(-1, 1), seeded;
                      sigma = sigma0 if given, else uniform in [0, 1]
                      from the same seeded stream

    Requested nutrient values must lie in [0, 1]; generated nutrient fields
    are clamped to that interval.  mu is set to -Lap(phi) + psi'(phi).
    """
    if sigma0 is not None and not 0.0 <= sigma0 <= 1.0:
        raise ConfigurationError(f"initial nutrient must lie in [0, 1], got {sigma0}")
    if kind == "constant":
        if phi0 is None or sigma0 is None:
            raise ConfigurationError("constant initial data needs phi0 and sigma0")
        phi = np.full(grid.cells, float(phi0))
        sig = np.full(grid.cells, float(sigma0))
    elif kind == "tanh_interface":
        if width is None or sigma0 is None:
            raise ConfigurationError("tanh_interface initial data needs width and sigma0")
        if width <= 0.0:
            raise ConfigurationError(f"interface width must be positive, got {width}")
        if not 0 <= normal_axis < grid.dim:
            raise ConfigurationError(f"normal_axis {normal_axis} out of range for dim {grid.dim}")
        x = grid.cell_centers(normal_axis) - 0.5 * grid.lengths[normal_axis]
        profile = np.tanh(x / (math.sqrt(2.0) * width))
        shape = [1] * grid.dim
        shape[normal_axis] = grid.cells[normal_axis]
        phi = np.broadcast_to(profile.reshape(shape), grid.cells).copy()
        sig = np.full(grid.cells, float(sigma0))
    elif kind == "random":
        if mean is None or amplitude is None:
            raise ConfigurationError("random initial data needs mean and amplitude")
        rng = np.random.default_rng(seed)
        phi = mean + amplitude * (2.0 * rng.random(grid.cells) - 1.0)
        sig = np.full(grid.cells, float(sigma0)) if sigma0 is not None else rng.random(grid.cells)
    else:
        raise ConfigurationError(f"unknown initial-condition kind {kind!r}")

    sig = np.clip(sig, 0.0, 1.0)
    phi_f = Field(grid, phi)
    mu_f = Field(grid, -gridmod.laplacian_array(phi_f.values, grid.spacing)
                 + np.asarray(pot.psi_prime(phi_f.values)))
    return SimState(t=0.0, phi=phi_f, mu=mu_f, sigma=Field(grid, sig))
