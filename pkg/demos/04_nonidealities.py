# %% [markdown]
# # Variability, line resistance and row policy
#
# Each sweep point runs complete trials: split, train, program, infer.

# %%
from rramvmm.harness import ExperimentConfig, load_wdbc, sweep

ds = load_wdbc("data/wdbc.data")
cfg = ExperimentConfig(trials=20)


def show(rows):
    for r in rows:
        print(f"  {r['knob']}={r['value']!s:>9}: software {r['software_test_acc_mean']:.4f}"
              f"  hardware {r['hardware_test_acc_mean']:.4f}"
              f"  hw<=sw in {r['hardware_le_software_fraction']:.0%} of trials")


# %%
print("programming spread")
show(sweep(cfg, "sigma", [0.0, 0.1, 0.2, 0.4], ds))
print("wire resistance per segment (Ohm)")
show(sweep(cfg, "line_resistance", [0.0, 1e3, 1e4, 1e5], ds))
print("non-sensed rows")
show(sweep(cfg.replace(line_resistance=1e4), "floating_policy", ["floating", "grounded"], ds))
