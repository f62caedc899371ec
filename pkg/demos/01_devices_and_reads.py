# %% [markdown]
# # Binary RRAM devices and a single row read
#
# A device sits in one of two states. Each SET or RESET pulse re-samples its
# resistance from a lognormal population around the state's median (MOhm).

# %%
import numpy as np

from rramvmm.crossbar import IDEAL, SNEAK, init_crossbar, program_cell, read_row
from rramvmm.device import DeviceState, ResistanceDistribution, sample_resistance

dist = ResistanceDistribution()
rng = np.random.default_rng(0)
lrs = np.array([sample_resistance(DeviceState.LRS, dist, rng) for _ in range(2000)])
hrs = np.array([sample_resistance(DeviceState.HRS, dist, rng) for _ in range(2000)])
print(f"LRS median {np.median(lrs):.2f} MOhm, HRS median {np.median(hrs):.2f} MOhm")
print(f"analytic P(R_lrs > R_hrs) = {dist.overlap_probability():.2e}")

# %% [markdown]
# Program-and-verify pulses a cell until it lands inside [median/1.5, median*1.5].

# %%
xbar = init_crossbar(4, 4, dist, rng)
attempts = [program_cell(xbar, r, r, DeviceState.LRS, rng) for r in range(4)]
print("attempts per diagonal cell:", attempts)
print(np.round(xbar.resistance, 2))

# %% [markdown]
# Driving all columns at 0.8 V and sensing one row. With ideal wires the
# virtual-ground TIA pins the sensed row, so floating rows do not disturb it.

# %%
v = np.full(4, 0.8)
print(f"ideal read {read_row(xbar, 0, v, IDEAL):.4f} V, nodal read {read_row(xbar, 0, v, SNEAK):.4f} V")
xbar.line_resistance = 1e4
print(f"with 10 kOhm wire segments: {read_row(xbar, 0, v, SNEAK):.4f} V")
