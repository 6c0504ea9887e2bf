"""Regime map over the (apoptosis, vasculature) plane.

Classifies every point of an (A, sigma_s) grid and renders the band
structure: apoptosis too weak relative to the nutrient floor locks the
tumor into growth; past the nutrient ceiling the certificate holds and the
dynamics are dissipative; in between the planar analysis is inconclusive.
"""
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from chtumor import Params, classify_regime, make_proliferation, make_quartic_potential
from pathlib import Path

OUT = Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

pot = make_quartic_potential()
prolif = make_proliferation(0.5, -2.0)
a_vals = np.linspace(0.05, 1.5, 121)
s_vals = np.linspace(0.05, 0.95, 91)

order = ["growth_locked", "indeterminate", "dissipative", "frozen_mass", "blowup"]
codes = np.empty((s_vals.size, a_vals.size), dtype=int)
for i, sig in enumerate(s_vals):
    for j, a in enumerate(a_vals):
        params = Params(P=1.0, A=a, B=1.0, C=0.5, sigma_s=sig)
        codes[i, j] = order.index(classify_regime(params, prolif, pot).tag)

found = [order[k] for k in np.unique(codes)]
print("regimes present on the map:", found)

fig, ax = plt.subplots(figsize=(7, 4.5))
im = ax.pcolormesh(a_vals, s_vals, codes, cmap="viridis", vmin=0, vmax=len(order) - 1)
# analytic band boundaries: A = B*sigma_s/(B+C) and A = B*sigma_s/(B-C*h_star)
ax.plot(s_vals / 1.5, s_vals, "w--", lw=1.2, label="A = floor(sigma_s)")
ax.plot(np.minimum(s_vals / 0.75, a_vals.max()), s_vals, "w:", lw=1.2, label="A = ceiling(sigma_s)")
ax.set_xlim(a_vals.min(), a_vals.max())
ax.set_xlabel("apoptosis rate A (P = 1)")
ax.set_ylabel("vasculature nutrient sigma_s")
ax.set_title("growth_locked / indeterminate / dissipative bands")
ax.legend(loc="lower right", fontsize=8)
fig.colorbar(im, ax=ax, ticks=range(len(order)), label="regime index")
fig.tight_layout()
fig.savefig(OUT / "regime_map.png", dpi=120)
print(f"wrote {OUT / 'regime_map.png'}")

# the same map is available from the command line:
#   chtumor sweep --config sweep.cfg --threads 4
# with [sweep] axis1 = A:0.05:1.5:30, axis2 = sigma_s:0.05:0.95:20,
# action = classify_only, writing regime_map.csv into the output directory.
