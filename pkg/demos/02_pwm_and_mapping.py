# %% [markdown]
# # PWM inputs and complementary weight mapping
#
# Features are min-max normalized and quantized to 0..255; a value n becomes
# n active cycles out of 255 (thermometer code).

# %%
import numpy as np

from rramvmm.device import IDEAL_DISTRIBUTION
from rramvmm.encoder import fit_normalization, pwm_expand, quantize
from rramvmm.mapper import plan_mapping, program_plan, schedule_inference
from rramvmm.trainer import forward

x = np.array([[0.0, 5.0], [10.0, 2.5], [4.0, 0.0]])
stats = fit_normalization(x)
q = quantize(x, stats)
print(q)
trace = pwm_expand(q[1])
print("active cycles per column:", trace.values())

# %% [markdown]
# Two classes of four binary weights on a 4x4 crossbar. Each weight uses a
# plus row and a minus row; +1 puts LRS on the plus row.

# %%
w = np.array([[-1, 1, 1, -1], [1, 1, -1, -1]])
plan = plan_mapping(w, 4, 4)
print(plan.target_states(0))

# %% [markdown]
# With no variability the hardware score is a positive multiple of the
# software score, so decisions agree.

# %%
xbars, report = program_plan(plan, IDEAL_DISTRIBUTION, 0)
sample = np.array([200, 10, 30, 250])
s = schedule_inference(plan, xbars, sample)
print("hardware scores", s.score, "-> class", s.decision)
print("software scores", forward(sample[None], w)[0])

# %% [markdown]
# 30 features and 2 classes on an 8x8 array need 4 partitions per class and
# two programming phases.

# %%
big = plan_mapping(np.ones((2, 30)), 8, 8)
print(big.n_partitions, "partitions,", big.phases, "phases")
