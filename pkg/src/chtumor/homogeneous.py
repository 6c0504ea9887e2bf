"""Spatially homogeneous reduction: a planar ODE for (X, S).

With no-flux boundaries, spatially constant data stays spatially constant
and the full system collapses to

    X' = (P*S - A) * h(X),
    S' = -C*S*h(X) - B*(S - sigma_s).

This module integrates that system (classical fixed-step RK4), computes the
positively invariant nutrient strip, locates equilibria numerically, and
classifies the parameter regime.  It doubles as the oracle for the PDE
stepper on constant fields.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .model import Params, Potential, Proliferation, check_dissipativity

DIVERGENCE_LIMIT = 1e9

REGIME_TAGS = ("dissipative", "frozen_mass", "blowup", "growth_locked", "indeterminate")


@dataclass(frozen=True)
class HomState:
    X: float
    S: float


@dataclass(frozen=True)
class Regime:
    tag: str
    explanation: str

    def __post_init__(self):
        if self.tag not in REGIME_TAGS:
            raise ConfigurationError(f"unknown regime tag {self.tag!r}")


@dataclass(frozen=True)
class HomTrajectory:
    """Fixed-step trajectory; arrays all share length.  ``diverged`` is set
    when |X| or |S| exceeded the divergence limit and integration stopped."""

    t: np.ndarray
    X: np.ndarray
    S: np.ndarray
    diverged: bool

    @property
    def final(self) -> HomState:
        return HomState(float(self.X[-1]), float(self.S[-1]))


def hom_rhs(state: HomState, params: Params, prolif: Proliferation) -> tuple[float, float]:
    """Right-hand side (X', S') of the homogeneous system."""
    hx = prolif._h_scalar(state.X)
    dx = (params.P * state.S - params.A) * hx
    ds = -params.C * state.S * hx - params.B * (state.S - params.sigma_s)
    return dx, ds


def integrate(initial: HomState, t_end: float, dt: float, params: Params,
              prolif: Proliferation) -> HomTrajectory:
    """Classical RK4 with fixed step dt from t = 0 to t_end.

    Deterministic; aborts (diverged flag, truncated arrays) as soon as an
    accepted state exceeds the divergence limit 1e9 in either component.
    """
    if dt <= 0.0:
        raise ConfigurationError(f"dt must be positive, got {dt}")
    n = max(0, round(float(t_end) / dt))
    ts = [0.0]
    xs = [float(initial.X)]
    ss = [float(initial.S)]
    P, A, B, C, sig = params.P, params.A, params.B, params.C, params.sigma_s
    h = prolif._h_scalar
    x, s = xs[0], ss[0]
    diverged = not (abs(x) <= DIVERGENCE_LIMIT and abs(s) <= DIVERGENCE_LIMIT)
    if not diverged:
        for k in range(1, n + 1):
            def f(xv, sv):
                hx = h(xv)
                return (P * sv - A) * hx, -C * sv * hx - B * (sv - sig)

            k1x, k1s = f(x, s)
            k2x, k2s = f(x + 0.5 * dt * k1x, s + 0.5 * dt * k1s)
            k3x, k3s = f(x + 0.5 * dt * k2x, s + 0.5 * dt * k2s)
            k4x, k4s = f(x + dt * k3x, s + dt * k3s)
            x += dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
            s += dt / 6.0 * (k1s + 2.0 * k2s + 2.0 * k3s + k4s)
            ts.append(k * dt)
            xs.append(x)
            ss.append(s)
            if abs(x) > DIVERGENCE_LIMIT or abs(s) > DIVERGENCE_LIMIT:
                diverged = True
                break
    return HomTrajectory(np.array(ts), np.array(xs), np.array(ss), diverged)


def invariant_strip(params: Params, prolif: Proliferation) -> tuple[float, float]:
    """Bounds of the positively invariant nutrient band.

    Once S enters [B*sigma_s/(C+B), B*sigma_s/(B-C*h_star)] it can never
    leave: S' > 0 below the band and S' < 0 above it.  Requires
    B - C*h_star > 0.
    """
    bch = params.B - params.C * prolif.h_star
    if bch <= 0.0:
        raise ConfigurationError("invariant strip needs B - C*h_star > 0")
    return (params.B * params.sigma_s / (params.B + params.C),
            params.B * params.sigma_s / bch)


def classify_regime(params: Params, prolif: Proliferation, pot: Potential) -> Regime:
    """Sort the parameter set into one of five qualitative regimes.

    frozen_mass    h_star = 0: X is conserved below -1, so no absorbing set
                   can capture arbitrarily negative initial masses.
    blowup         C*h_star >= B: from X << 0, S >> 0 both |X| and S grow
                   without bound.
    growth_locked  A/P <= lower strip bound: inside the strip with X >= 1,
                   X' > 0 forever, so the tumor mass grows indefinitely.
    dissipative    all certificate conditions hold.
    indeterminate  everything else (in particular A/P inside the strip, a
                   case the planar analysis does not settle).
    """
    hs = prolif.h_star
    if hs == 0.0:
        return Regime("frozen_mass",
                      "h_star = 0: h vanishes below -1 and the tumor mass is frozen there; "
                      "no bounded absorbing set can exist")
    if params.C * hs >= params.B:
        return Regime("blowup",
                      f"C*h_star = {params.C * hs:g} >= B = {params.B:g}: from X << 0, S >> 0 "
                      "both |X| and S increase forever")
    lower, upper = invariant_strip(params, prolif)
    ratio = params.A / params.P
    if ratio <= lower:
        return Regime("growth_locked",
                      f"A/P = {ratio:g} <= {lower:g}, the lower strip bound: inside the strip "
                      "X' > 0 wherever X >= 1, so X grows forever")
    cert = check_dissipativity(params, pot, prolif)
    if cert.satisfied:
        return Regime("dissipative", "all compatibility conditions hold; trajectories enter "
                                     f"the strip S in [{lower:g}, {upper:g}] and X stays bounded")
    if ratio <= upper:
        return Regime("indeterminate",
                      f"A/P = {ratio:g} lies inside the strip ({lower:g}, {upper:g}]: the sign "
                      "of X' changes across the strip and the planar analysis is inconclusive")
    return Regime("indeterminate",
                  "A/P clears the strip but a certificate condition fails "
                  f"(limit_below_one={cert.limit_below_one}, superquadratic={cert.superquadratic})")


def find_equilibria(params: Params, prolif: Proliferation,
                    x_lo: float | None = None, x_hi: float = 3.0,
                    samples: int = 4001) -> list[HomState]:
    """Numeric scan for fixed points of the planar system.

    Stationarity requires either h(X) = 0 with S = sigma_s, or S = A/P with
    h(X) = B*(sigma_s*P - A)/(C*A).  Roots of h are bracketed on a dense
    grid over [phi_star - 2, x_hi] and refined by bisection; nothing is
    solved symbolically.
    """
    if x_lo is None:
        x_lo = prolif.phi_star - 2.0
    out: list[HomState] = []
    for level, s_val in (
        (0.0, params.sigma_s),
        (params.B * (params.sigma_s * params.P - params.A) / (params.C * params.A), params.A / params.P),
    ):
        for x in _h_level_roots(prolif, level, x_lo, x_hi, samples):
            cand = HomState(x, s_val)
            if not any(abs(cand.X - e.X) < 1e-7 and abs(cand.S - e.S) < 1e-7 for e in out):
                out.append(cand)
    return out


def _h_level_roots(prolif: Proliferation, level: float, x_lo: float, x_hi: float,
                   samples: int) -> list[float]:
    if not -prolif.h_star <= level <= 1.0:
        return []
    xs = np.linspace(x_lo, x_hi, samples)
    vals = prolif.h(xs) - level
    roots: list[float] = []
    i = 0
    while i < samples - 1:
        a, b = vals[i], vals[i + 1]
        if a == 0.0:
            # collapse a plateau run (h flat at the level) to its right end,
            # the point where the dynamics can actually depart
            j = i
            while j + 1 < samples and vals[j + 1] == 0.0:
                j += 1
            roots.append(float(xs[j]))
            i = j + 1
            continue
        if a * b < 0.0:
            lo, hi = float(xs[i]), float(xs[i + 1])
            flo = a
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                fm = prolif._h_scalar(mid) - level
                if flo * fm <= 0.0:
                    hi = mid
                else:
                    lo, flo = mid, fm
            roots.append(0.5 * (lo + hi))
        i += 1
    if vals[-1] == 0.0 and (not roots or roots[-1] < float(xs[-1]) - 1e-12):
        roots.append(float(xs[-1]))
    return roots
