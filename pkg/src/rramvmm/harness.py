"""Dataset ingestion and end-to-end experiments.

A trial runs the full flow: shuffle and split the data, train the binarized
ADALINE in software, map and program its weights, then classify both splits
on the simulated crossbars. Trials derive all randomness from the root seed
through named substreams, so a config fully determines its result.
"""

from __future__ import annotations

import csv
import dataclasses
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .crossbar import ReadMode
from .device import ResistanceDistribution
from .errors import DataError, ExperimentError, ParameterError
from .mapper import hardware_forward_dataset, plan_mapping, program_plan
from .rng import substream
from .trainer import DEFAULT_BATCH, DEFAULT_EPOCHS, train

log = logging.getLogger(__name__)

N_FEATURES = 30
CANONICAL_COUNTS = (357, 212)  # benign, malignant
DIAGNOSIS = {"B": 0, "M": 1}


@dataclass
class Dataset:
    features: np.ndarray
    labels: np.ndarray
    ids: np.ndarray | None = None

    def __len__(self):
        return len(self.labels)

    @property
    def class_counts(self):
        return tuple(int(np.sum(self.labels == c)) for c in (0, 1))

    def subset(self, idx):
        return Dataset(
            self.features[idx], self.labels[idx], None if self.ids is None else self.ids[idx]
        )


def load_wdbc(path):
    """Read a WDBC file: ``id, diagnosis (M/B), 30 features`` per line.

    Benign maps to class 0 and malignant to class 1. A file with 569 rows is
    taken to be the canonical dataset and its class counts are checked.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"{path}: no such file")
    ids, feats, labels = [], [], []
    with path.open(newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != N_FEATURES + 2:
                raise DataError(
                    f"{path}:{lineno}: expected {N_FEATURES + 2} columns, got {len(row)}"
                )
            code = row[1].strip()
            if code not in DIAGNOSIS:
                raise DataError(f"{path}:{lineno}: unknown diagnosis code {code!r}")
            try:
                values = [float(c) for c in row[2:]]
            except ValueError as e:
                raise DataError(f"{path}:{lineno}: {e}") from None
            ids.append(row[0].strip())
            labels.append(DIAGNOSIS[code])
            feats.append(values)
    if not labels:
        raise DataError(f"{path}: no samples")
    ds = Dataset(np.array(feats), np.array(labels, dtype=np.int64), np.array(ids))
    if len(ds) == sum(CANONICAL_COUNTS) and ds.class_counts != CANONICAL_COUNTS:
        raise DataError(
            f"{path}: class counts {ds.class_counts} differ from canonical {CANONICAL_COUNTS}"
        )
    return ds


def split(dataset, fraction=0.8, seed=0):
    """Seeded shuffle, then the first ``floor(fraction * n)`` samples train."""
    if not 0 < fraction < 1:
        raise ParameterError(f"split fraction must lie in (0, 1), got {fraction}")
    n = len(dataset)
    perm = substream(seed, "shuffle").permutation(n)
    n_train = math.floor(fraction * n)
    return dataset.subset(perm[:n_train]), dataset.subset(perm[n_train:])


@dataclass
class ExperimentConfig:
    """Everything a run depends on. Field names match the config file keys."""

    data_path: str = "data/wdbc.data"
    seed: int = 0
    trials: int = 10
    split_fraction: float = 0.8
    epochs: int = DEFAULT_EPOCHS
    batch_size: int = DEFAULT_BATCH
    lr: float = 1e-3
    init_scale: float = 0.1
    bias: bool = False
    rows: int = 8
    cols: int = 8
    median_lrs: float = 2.0
    median_hrs: float = 50.0
    sigma_lrs: float = 0.15
    sigma_hrs: float = 0.15
    variability: str = "cycle"
    read_mode: str = "sneak"
    floating_policy: str = "floating"
    r_f: float | None = None
    pulse_voltage: float = 0.8
    rail: float | None = 3.3
    line_resistance: float = 0.0
    sense_noise: float = 0.0
    verify_window_factor: float = 1.5
    max_attempts: int = 10
    on_failure: str = "accept"

    def __post_init__(self):
        if not 0 < self.split_fraction < 1:
            raise ParameterError("split_fraction must lie in (0, 1)")
        if self.trials < 1:
            raise ParameterError("trials must be >= 1")
        ReadMode(self.read_mode, self.floating_policy)
        self.distribution()

    def distribution(self):
        return ResistanceDistribution(
            self.median_lrs, self.median_hrs, self.sigma_lrs, self.sigma_hrs, self.variability
        )

    def read(self):
        return ReadMode(self.read_mode, self.floating_policy)

    def crossbar_kwargs(self):
        return {
            "r_f": self.r_f,
            "read_voltage": self.pulse_voltage,
            "line_resistance": self.line_resistance,
            "rail": self.rail,
            "sense_noise": self.sense_noise,
        }

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    def to_dict(self):
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d):
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ParameterError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)


@dataclass
class ExperimentResult:
    config: dict
    trials: list = field(default_factory=list)
    aggregate: dict = field(default_factory=dict)

    def column(self, name):
        return np.array([t[name] for t in self.trials])

    def to_dict(self):
        return {"config": self.config, "trials": self.trials, "aggregate": self.aggregate}

    @classmethod
    def from_dict(cls, d):
        return cls(dict(d["config"]), list(d["trials"]), dict(d["aggregate"]))

    def __eq__(self, other):
        return isinstance(other, ExperimentResult) and self.to_dict() == other.to_dict()


ACCURACY_KEYS = ("software_train_acc", "software_test_acc", "hardware_train_acc", "hardware_test_acc")


def run_trial(config, dataset, trial):
    """One split/train/map/program/infer pass. Returns a JSON-ready dict."""
    split_seed = int(substream(config.seed, "trial", trial, "split").integers(2**31))
    train_seed = int(substream(config.seed, "trial", trial, "train").integers(2**31))
    device_rng = substream(config.seed, "trial", trial, "device")
    sense_rng = substream(config.seed, "trial", trial, "sense")

    tr, te = split(dataset, config.split_fraction, split_seed)
    model = train(
        tr.features,
        tr.labels,
        config.epochs,
        config.batch_size,
        train_seed,
        n_classes=2,
        lr=config.lr,
        init_scale=config.init_scale,
        bias=config.bias,
    )
    plan = plan_mapping(model.binary_weights, config.rows, config.cols)
    crossbars, report = program_plan(
        plan,
        config.distribution(),
        device_rng,
        window_factor=config.verify_window_factor,
        max_attempts=config.max_attempts,
        on_failure=config.on_failure,
        **config.crossbar_kwargs(),
    )
    out = {"trial": trial, "split_seed": split_seed, "train_seed": train_seed}
    diagnostics = {}
    for name, part in (("train", tr), ("test", te)):
        q = model.encode(part.features)
        sw = model.predict(part.features)
        hw, _, diag = hardware_forward_dataset(plan, crossbars, q, config.read(), sense_rng)
        out[f"software_{name}_acc"] = float(np.mean(sw == part.labels))
        out[f"hardware_{name}_acc"] = float(np.mean(hw == part.labels))
        out[f"agreement_{name}"] = float(np.mean(hw == sw))
        diagnostics[name] = diag
    out["phases"] = plan.phases
    out["solver"] = diagnostics
    out["programming"] = report.summary()
    return out


def aggregate(trials):
    agg = {}
    for key in ACCURACY_KEYS:
        vals = np.array([t[key] for t in trials])
        agg[f"{key}_mean"] = float(vals.mean())
        agg[f"{key}_std"] = float(vals.std())
    hw = np.array([t["hardware_test_acc"] for t in trials])
    sw = np.array([t["software_test_acc"] for t in trials])
    agg["hardware_le_software_fraction"] = float(np.mean(hw <= sw))
    return agg


def run_experiment(config, dataset=None):
    """Run ``config.trials`` trials and aggregate their accuracies."""
    if dataset is None:
        dataset = load_wdbc(config.data_path)
    trials = []
    for t in range(config.trials):
        try:
            trials.append(run_trial(config, dataset, t))
        except Exception as e:  # noqa: BLE001 - re-raised with the trial index
            raise ExperimentError(t, e) from e
        log.debug("trial %d: %s", t, {k: trials[-1][k] for k in ACCURACY_KEYS})
    return ExperimentResult(config.to_dict(), trials, aggregate(trials))


SWEEP_KNOBS = ("sigma", "median_ratio", "line_resistance", "floating_policy")


def _apply_knob(config, knob, value):
    if knob == "sigma":
        return config.replace(sigma_lrs=float(value), sigma_hrs=float(value))
    if knob == "median_ratio":
        return config.replace(median_hrs=config.median_lrs * float(value))
    if knob == "line_resistance":
        return config.replace(line_resistance=float(value))
    if knob == "floating_policy":
        return config.replace(floating_policy=str(value))
    raise ParameterError(f"unknown sweep knob {knob!r}; choose from {SWEEP_KNOBS}")


def sweep(config, knob, values, dataset=None):
    """Run one experiment per knob value; returns a list of table rows."""
    values = list(values)
    if not values:
        raise ParameterError("sweep needs at least one value")
    if knob not in SWEEP_KNOBS:
        raise ParameterError(f"unknown sweep knob {knob!r}; choose from {SWEEP_KNOBS}")
    if dataset is None:
        dataset = load_wdbc(config.data_path)
    rows = []
    for v in values:
        res = run_experiment(_apply_knob(config, knob, v), dataset)
        rows.append({"knob": knob, "value": v, **res.aggregate})
    return rows


def write_table(rows, path):
    """Write sweep rows as CSV."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        w.writerows(rows)
