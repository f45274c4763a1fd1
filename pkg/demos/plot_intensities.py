"""
==================================
Output intensities of the CBW ring
==================================

Sweep the Sagnac phase over two periods for a lossy ring with ``r = 0.999``
and 5000 round trips, then overlay the Fabry-Perot Airy curve of the same
mirror reflectance.
"""

# %%
# Sweep
# -----

import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from cbw_gyro import CavityConfig, FabryPerotConfig, fp_trace, sweep
from cbw_gyro.fringes import find_peaks, fwhm, principal_peak

cfg = CavityConfig(r=0.999, max_order=5000)
trace = sweep(cfg, -2 * math.pi, 2 * math.pi, 40001)

print("peaks on port A:", [round(p.position / math.pi, 6) for p in find_peaks(trace)], "x pi")

# %%
# The bright fringes sit at odd multiples of pi; at 0, +-pi/2 and +-2pi both
# ports are dark once normalized against the resonance.

fig, ax = plt.subplots(figsize=(7, 3))
ax.plot(trace.psi_grid / math.pi, trace.i_a, label="I_A")
ax.set_xlabel("psi / pi")
ax.set_ylabel("normalized intensity")
fig.savefig("intensities.png", dpi=120, bbox_inches="tight")

# %%
# Zoom around pi and compare with the Fabry-Perot baseline
# --------------------------------------------------------

fp = fp_trace(FabryPerotConfig(r=0.999), trace.psi_grid)
w_cbw = fwhm(trace, principal_peak(trace))
w_fp = fwhm(fp, principal_peak(fp))
print(f"FWHM CBW = {w_cbw:.3e} rad, FWHM FP = {w_fp:.3e} rad, ratio = {w_fp / w_cbw:.2f}")

window = abs(trace.psi_grid - math.pi) < 0.01
fig, ax = plt.subplots(figsize=(7, 3))
ax.plot(trace.psi_grid[window], trace.i_a[window], label="I_A")
ax.plot(trace.psi_grid[window], trace.i_b[window], "r", label="I_B")
ax.plot(trace.psi_grid[window], fp.i_a[window], "g:", label="Fabry-Perot")
ax.set_xlabel("psi (rad)")
ax.legend()
fig.savefig("intensities_zoom.png", dpi=120, bbox_inches="tight")
