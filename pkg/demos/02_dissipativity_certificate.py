"""The dissipativity certificate and the nutrient comparison envelopes.

For the reference constants (P, A, B, C, sigma_s) = (1, 1, 1, 0.5, 0.5)
with plateau depth 0.5 the four compatibility conditions hold, the largest
admissible slack is 1/6, and after the settling time T1 the nutrient is
trapped within eps/P of the band [B*sigma_s/(B+C), B*sigma_s/(B-C*h_star)].
The script prints the certificate, shows how it degrades as the plateau
depth moves, and plots both envelopes with their limits.
"""
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from chtumor import (
    Params,
    absorption_time,
    check_dissipativity,
    envelope_lower,
    envelope_upper,
    make_proliferation,
    make_quartic_potential,
)
from pathlib import Path

OUT = Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

params = Params(P=1.0, A=1.0, B=1.0, C=0.5, sigma_s=0.5)
pot = make_quartic_potential()
prolif = make_proliferation(0.5, -2.0)

cert = check_dissipativity(params, pot, prolif)
print("=== certificate at the reference constants ===")
print(f"conditions: plateau={cert.has_plateau_margin}, limit<1={cert.limit_below_one}, "
      f"apoptosis={cert.apoptosis_margin}, superquadratic={cert.superquadratic}")
print(f"nutrient band: [{cert.sigma_lower_limit:.6f}, {cert.sigma_upper_limit:.6f}]")
print(f"largest admissible eps: {cert.epsilon_max:.6f} (= 1/6)")
print(f"safe eps (half):        {cert.epsilon:.6f}")
print(f"T1 at the safe eps:     {cert.t1:.6f}")
print(f"T1 at eps = 1/6:        {absorption_time(params, prolif, cert.epsilon_max):.6f} "
      f"(= (4/3) ln 2 = {4.0 / 3.0 * np.log(2.0):.6f})")

print("\n=== how the verdict depends on the plateau depth ===")
for h_star in (0.0, 0.25, 0.5, 0.75, 1.0, 1.5):
    prl = make_proliferation(h_star, -2.0) if h_star > 0 else make_proliferation(0.0, -1.0)
    c = check_dissipativity(params, pot, prl)
    print(f"h_star = {h_star:4.2f}: satisfied={str(c.satisfied):5s} "
          f"upper_limit={'None' if c.sigma_upper_limit is None else format(c.sigma_upper_limit, '.4f')}")

t = np.linspace(0.0, 8.0, 400)
upper = envelope_upper(params, prolif, t)
lower = envelope_lower(params, t)
fig, ax = plt.subplots(figsize=(7, 4))
ax.plot(t, upper, label="upper envelope (from 1)")
ax.plot(t, lower, label="lower envelope (from 0)")
ax.axhline(cert.sigma_upper_limit, ls="--", c="gray", lw=0.8)
ax.axhline(cert.sigma_lower_limit, ls="--", c="gray", lw=0.8)
t1 = absorption_time(params, prolif, cert.epsilon_max)
ax.axvline(t1, ls=":", c="k", lw=0.8)
ax.annotate("T1", (t1, 0.05))
ax.set_xlabel("t")
ax.set_ylabel("nutrient bound")
ax.set_title("comparison envelopes squeeze the nutrient into the band")
ax.legend()
fig.tight_layout()
fig.savefig(OUT / "envelopes.png", dpi=120)
print(f"\nwrote {OUT / 'envelopes.png'}")
