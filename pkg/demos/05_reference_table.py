# %% [markdown]
# # Software vs crossbar accuracy
#
# The reference numbers are 74.06 / 78.07 % (software train / test) and
# 67.54 % test accuracy on an 8x8 OxRAM crossbar.

# %%
from rramvmm.harness import ExperimentConfig, load_wdbc, run_experiment

ds = load_wdbc("data/wdbc.data")
ideal = ExperimentConfig(trials=20, read_mode="ideal", sigma_lrs=0.0, sigma_hrs=0.0)
sneak = ExperimentConfig(trials=20)

# %%
for name, cfg in (("ideal, no spread", ideal), ("nodal read, default spread", sneak)):
    agg = run_experiment(cfg, ds).aggregate
    print(f"{name:28s} software train {agg['software_train_acc_mean']:.4f}"
          f"  test {agg['software_test_acc_mean']:.4f}"
          f"  hardware test {agg['hardware_test_acc_mean']:.4f} +- {agg['hardware_test_acc_std']:.4f}")
