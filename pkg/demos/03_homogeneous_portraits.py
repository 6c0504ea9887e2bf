"""Phase portraits of the homogeneous reduction across parameter regimes.

Spatially constant data turns the PDE system into a planar ODE for
(X, S).  Four parameter sets illustrate the regime taxonomy: dissipative
(trajectories funnel into the invariant nutrient strip and X settles),
frozen mass (X conserved below -1), blow-up (consumption dominates supply
and both components run away), and growth-locked (X grows forever inside
the strip).
"""
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from chtumor import (
    HomState,
    Params,
    classify_regime,
    find_equilibria,
    integrate,
    invariant_strip,
    make_proliferation,
    make_quartic_potential,
)
from pathlib import Path

OUT = Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)
QUARTIC = make_quartic_potential()

cases = {
    "dissipative": (Params(P=1.0, A=1.0, B=1.0, C=0.5, sigma_s=0.5),
                    make_proliferation(0.5, -2.0), 30.0),
    "frozen_mass": (Params(P=1.0, A=1.0, B=1.0, C=0.5, sigma_s=0.5),
                    make_proliferation(0.0, -1.0), 30.0),
    "blowup": (Params(P=1.0, A=1.0, B=0.5, C=1.0, sigma_s=0.5),
               make_proliferation(1.0, -2.0), 12.0),
    "growth_locked": (Params(P=3.0, A=0.5, B=1.0, C=0.5, sigma_s=0.9),
                      make_proliferation(0.5, -2.0), 12.0),
}

fig, axes = plt.subplots(2, 2, figsize=(10, 8))
rng = np.random.default_rng(1)
for ax, (name, (params, prolif, t_end)) in zip(axes.ravel(), cases.items()):
    regime = classify_regime(params, prolif, QUARTIC)
    print(f"{name:14s} -> {regime.tag}")
    print(f"    {regime.explanation}")
    if params.B - params.C * prolif.h_star > 0.0:
        lo, hi = invariant_strip(params, prolif)
        ax.axhspan(lo, hi, color="tab:orange", alpha=0.15, label="invariant strip")
    for _ in range(8):
        start = HomState(rng.uniform(-3.0, 3.0), rng.uniform(0.05, 0.95))
        traj = integrate(start, t_end, 0.01, params, prolif)
        ax.plot(traj.X, traj.S, lw=0.8)
        ax.plot([start.X], [start.S], "k.", ms=3)
    for eq in find_equilibria(params, prolif):
        ax.plot([eq.X], [eq.S], "r*", ms=10)
    ax.set_title(f"{name} ({regime.tag})")
    ax.set_xlabel("X (tumor mass)")
    ax.set_ylabel("S (nutrient)")
    ax.set_xlim(-6, 6)
    ax.set_ylim(0, 1.6)
fig.tight_layout()
fig.savefig(OUT / "phase_portraits.png", dpi=120)
print(f"\nwrote {OUT / 'phase_portraits.png'}")

print("\n=== strip retention, dissipative case ===")
params, prolif, _ = cases["dissipative"]
lo, hi = invariant_strip(params, prolif)
worst = 0.0
for seed in range(10):
    r = np.random.default_rng(seed)
    traj = integrate(HomState(r.uniform(-3, 3), r.uniform(lo, hi)), 100.0, 0.02, params, prolif)
    worst = max(worst, lo - traj.S.min(), traj.S.max() - hi)
print(f"worst excursion outside [{lo:.4f}, {hi:.4f}] over 10 seeds, T=100: {worst:.2e}")
