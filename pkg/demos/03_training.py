# %% [markdown]
# # Training a binarized ADALINE on WDBC
#
# Latent real weights are updated with ADAM through a straight-through
# estimator; the forward pass uses their signs.

# %%
import numpy as np

from rramvmm.harness import load_wdbc, split
from rramvmm.trainer import evaluate, train

ds = load_wdbc("data/wdbc.data")
tr, te = split(ds, 0.8, seed=0)
print(len(tr), "train /", len(te), "test")

# %%
for epochs in (1, 10, 100):
    model = train(tr.features, tr.labels, epochs=epochs, batch_size=16, seed=0)
    print(f"{epochs:4d} epochs: train {evaluate(model, tr.features, tr.labels):.3f}"
          f"  test {evaluate(model, te.features, te.labels):.3f}")

# %% [markdown]
# The binary weight matrix that gets mapped to hardware:

# %%
print(model.binary_weights.astype(int))
