"""Input preprocessing and PWM encoding.

Features are min-max normalised on the training split, quantized to 8-bit
integers and applied to the crossbar columns as thermometer-coded pulse
trains: an input of ``n`` is a pulse held high for the first ``n`` of 255
clock cycles.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .crossbar import IDEAL, DEFAULT_READ_VOLTAGE, ReadMode, sensed_current, tia_output
from .errors import ParameterError

LEVELS = 255
CYCLE_PERIOD_S = 17e-3


@dataclass(frozen=True)
class NormalizationStats:
    min: np.ndarray
    max: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.min, dtype=float)
        hi = np.asarray(self.max, dtype=float)
        if lo.shape != hi.shape or lo.ndim != 1:
            raise ParameterError("min and max must be 1-D arrays of equal length")
        if np.any(hi < lo):
            raise ParameterError("per-feature max must be >= min")
        object.__setattr__(self, "min", lo)
        object.__setattr__(self, "max", hi)

    @property
    def n_features(self):
        return self.min.size

    def to_dict(self):
        return {"min": self.min.tolist(), "max": self.max.tolist()}

    @classmethod
    def from_dict(cls, d):
        return cls(np.asarray(d["min"]), np.asarray(d["max"]))

    def __eq__(self, other):
        return (
            isinstance(other, NormalizationStats)
            and np.array_equal(self.min, other.min)
            and np.array_equal(self.max, other.max)
        )


@dataclass(frozen=True)
class PwmTrace:
    """Per-cycle column activity: ``cycles[c, f]`` is 1 when feature f is high."""

    cycles: np.ndarray
    pulse_voltage: float = DEFAULT_READ_VOLTAGE
    cycle_period: float = CYCLE_PERIOD_S

    @property
    def n_features(self):
        return self.cycles.shape[1]

    def values(self):
        return self.cycles.sum(axis=0)


def fit_normalization(x_train):
    """Per-feature min and max over the training samples."""
    x = np.atleast_2d(np.asarray(x_train, dtype=float))
    if x.shape[0] == 0:
        raise ParameterError("cannot fit normalization on an empty sample set")
    return NormalizationStats(x.min(axis=0), x.max(axis=0))


def round_half_away(x):
    """Round to nearest integer, ties away from zero (numpy rounds ties to even)."""
    x = np.asarray(x, dtype=float)
    return np.sign(x) * np.floor(np.abs(x) + 0.5)


def normalize(x, stats):
    """Min-max scale to [0, 1], clamping out-of-range values.

    Constant features (max == min) map to 0.
    """
    x = np.asarray(x, dtype=float)
    span = stats.max - stats.min
    safe = np.where(span > 0, span, 1.0)
    xn = np.where(span > 0, (x - stats.min) / safe, 0.0)
    return np.clip(xn, 0.0, 1.0)


def quantize(x, stats):
    """Quantize one sample (or a batch along axis 0) to integers in [0, 255]."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != stats.n_features:
        raise ParameterError(f"expected {stats.n_features} features, got {x.shape[-1]}")
    return round_half_away(normalize(x, stats) * LEVELS).astype(np.int64)


def pwm_expand(q, pulse_voltage=DEFAULT_READ_VOLTAGE):
    """Thermometer-code a quantized sample over 255 cycles."""
    q = np.asarray(q)
    if q.ndim != 1 or np.any(q < 0) or np.any(q > LEVELS):
        raise ParameterError("quantized sample must be 1-D with values in [0, 255]")
    cycles = (np.arange(LEVELS)[:, None] < q[None, :]).astype(np.int8)
    return PwmTrace(cycles, pulse_voltage)


def pwm_accumulate(xbar, row, trace, mode=IDEAL, rng=None, diagnostics=None):
    """Sum of TIA outputs of ``row`` over all cycles of ``trace``.

    Cycles sharing one column-activation pattern are solved once and weighted
    by their count; thermometer traces have at most F + 1 distinct patterns.
    With sense noise enabled every cycle still draws its own noise sample.
    ``diagnostics``, if a dict, gets ``solves`` and ``clipped`` counters added.
    """
    if trace.n_features != xbar.cols:
        raise ParameterError(f"trace has {trace.n_features} features, crossbar has {xbar.cols} columns")
    mode = mode if isinstance(mode, ReadMode) else ReadMode(mode)
    patterns, counts = np.unique(trace.cycles, axis=0, return_counts=True)
    total = 0.0
    solves = clipped = 0
    for pattern, count in zip(patterns, counts):
        if not pattern.any() and xbar.sense_noise == 0:
            continue
        current = sensed_current(xbar, row, trace.pulse_voltage * pattern, mode)
        solves += 1
        if xbar.sense_noise > 0:
            for _ in range(count):
                v, clip = tia_output(xbar, current, rng)
                total += v
                clipped += clip
        else:
            v, clip = tia_output(xbar, current)
            total += count * v
            clipped += count * clip
    if diagnostics is not None:
        diagnostics["solves"] = diagnostics.get("solves", 0) + solves
        diagnostics["clipped"] = diagnostics.get("clipped", 0) + clipped
    return total
