"""
====================
Per-order amplitudes
====================

Neighbouring orders cancel pairwise at even multiples of pi because of the
alternating sign, and add up at odd multiples.
"""

import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from cbw_gyro import CavityConfig, mode_traces

cfg = CavityConfig(r=0.999, max_order=5000)

# %%
# Two neighbouring orders near psi = 0 and psi = pi
# -------------------------------------------------

fig, axes = plt.subplots(1, 2, figsize=(8, 3), sharey=True)
for ax, centre in zip(axes, (0.0, math.pi)):
    grid = np.linspace(centre - 0.05, centre + 0.05, 2001)
    for mt in mode_traces([100, 101], cfg, grid):
        ax.plot(grid, mt.amp_a, label=f"m = {mt.order}")
    ax.set_title(f"psi near {centre / math.pi:.0f} pi")
    ax.legend()
fig.savefig("modes_neighbours.png", dpi=120, bbox_inches="tight")

# %%
# Envelope over all orders
# ------------------------
# Every order oscillates inside the loss envelope r**m.

orders = np.arange(1, 5001, 50)
grid = np.linspace(-2 * math.pi, 2 * math.pi, 4001)
peak = [np.max(np.abs(mt.amp_a)) for mt in mode_traces(orders, cfg, grid)]
fig, ax = plt.subplots(figsize=(7, 3))
ax.semilogy(orders, peak, ".", label="max |E_A^(m)|")
ax.semilogy(orders, 0.999**orders, "k--", label="r^m")
ax.set_xlabel("order m")
ax.legend()
fig.savefig("modes_envelope.png", dpi=120, bbox_inches="tight")
