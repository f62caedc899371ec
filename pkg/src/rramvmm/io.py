"""JSON persistence for models, crossbars, plans, reports and results.

Every file is ``{"schema_version", "kind", "data"}``. Loading checks the
major version and the required fields of ``data``; unknown extra fields are
accepted with a warning so newer minor versions stay readable.
"""

from __future__ import annotations

import json
import warnings
from pathlib import Path

from .crossbar import CrossbarState
from .errors import SchemaError
from .harness import ExperimentConfig, ExperimentResult
from .mapper import MappingPlan, ProgrammingReport
from .trainer import TrainedModel

SCHEMA_VERSION = "1.0"

KINDS = {
    "model": (
        TrainedModel,
        ("latent_weights", "binary_weights", "stats", "classes", "epochs_run",
         "batch_size", "seed", "hyperparameters", "metrics"),
    ),
    "crossbar": (
        CrossbarState,
        ("rows", "cols", "cells", "dist_params", "line_resistance", "r_f",
         "read_voltage", "rail", "sense_noise", "d2d_z"),
    ),
    "plan": (
        MappingPlan,
        ("slots", "n_partitions", "phases", "rows", "cols", "n_classes", "n_features"),
    ),
    "report": (ProgrammingReport, ("entries",)),
    "result": (ExperimentResult, ("config", "trials", "aggregate")),
}


def kind_of(obj):
    for kind, (cls, _) in KINDS.items():
        if isinstance(obj, cls):
            return kind
    raise TypeError(f"cannot persist object of type {type(obj).__name__}")


def dumps(obj):
    doc = {"schema_version": SCHEMA_VERSION, "kind": kind_of(obj), "data": obj.to_dict()}
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"


def save_artifacts(obj, path):
    """Write ``obj`` to ``path``; output is byte-identical for equal objects."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(obj))
    return path


def loads(text, kind=None):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError(f"not valid JSON: {e}") from None
    for key in ("schema_version", "kind", "data"):
        if key not in doc:
            raise SchemaError(f"missing field {key!r}")
    major = str(doc["schema_version"]).split(".")[0]
    if major != SCHEMA_VERSION.split(".")[0]:
        raise SchemaError(
            f"schema_version {doc['schema_version']} is incompatible with {SCHEMA_VERSION}"
        )
    if doc["kind"] not in KINDS:
        raise SchemaError(f"unknown kind {doc['kind']!r}")
    if kind is not None and doc["kind"] != kind:
        raise SchemaError(f"expected a {kind!r} file, got {doc['kind']!r}")
    cls, required = KINDS[doc["kind"]]
    data = doc["data"]
    for key in required:
        if key not in data:
            raise SchemaError(f"{doc['kind']} file is missing field {key!r}")
    extra = sorted(set(data) - set(required))
    if extra:
        warnings.warn(f"ignoring unknown {doc['kind']} fields {extra}", stacklevel=3)
        data = {k: v for k, v in data.items() if k in required}
    return cls.from_dict(data)


def load_artifacts(path, kind=None):
    """Read an artifact written by :func:`save_artifacts`."""
    return loads(Path(path).read_text(), kind)


def load_config(path):
    """Read an experiment config: a flat JSON object of ExperimentConfig fields."""
    try:
        d = json.loads(Path(path).read_text())
    except json.JSONDecodeError as e:
        raise SchemaError(f"{path}: not valid JSON: {e}") from None
    if not isinstance(d, dict):
        raise SchemaError(f"{path}: config must be a JSON object")
    return ExperimentConfig.from_dict(d)
