"""Crossbar state, programming protocol and row reads.

Input voltages drive the columns; one row at a time is sensed by a TIA held at
virtual ground. Only magnitudes are stored: the negative read polarity of the
testbench is realised there by swapping electrodes, which does not change the
numerics.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from . import solver
from .device import (
    DeviceCell,
    DeviceState,
    ResistanceDistribution,
    Variability,
    conductance_siemens,
    sample_resistance,
    transition,
)
from .errors import ParameterError, ProgramFailure
from .rng import as_generator

DEFAULT_READ_VOLTAGE = 0.8
DEFAULT_RAIL = 3.3
# fraction of the rail used by a full-scale (all-LRS, all-driven) row at median LRS
RF_HEADROOM = 0.8


class Mode(str, enum.Enum):
    IDEAL = "ideal"
    SNEAK = "sneak"


class RowPolicy(str, enum.Enum):
    FLOATING = "floating"
    GROUNDED = "grounded"


@dataclass(frozen=True)
class ReadMode:
    mode: Mode = Mode.IDEAL
    floating_row_policy: RowPolicy = RowPolicy.FLOATING

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        object.__setattr__(self, "floating_row_policy", RowPolicy(self.floating_row_policy))


IDEAL = ReadMode(Mode.IDEAL)
SNEAK = ReadMode(Mode.SNEAK)


def default_feedback_resistance(cols, dist, read_voltage=DEFAULT_READ_VOLTAGE, rail=DEFAULT_RAIL):
    """Feedback resistance (Ohm) that keeps a full-scale row read inside the rail."""
    full_scale = cols * read_voltage * float(conductance_siemens(dist.median_lrs))
    return RF_HEADROOM * rail / full_scale


@dataclass(eq=False)
class CrossbarState:
    """An R x C selector-free crossbar.

    Per-cell data is held in parallel arrays; :meth:`cell` gives a
    :class:`DeviceCell` view. ``line_resistance`` and ``r_f`` are in Ohm,
    ``resistance`` in MOhm. ``rail=None`` disables TIA clipping and
    ``sense_noise`` is the std (V) of additive Gaussian noise per read.
    """

    states: np.ndarray
    resistance: np.ndarray
    program_count: np.ndarray
    dist: ResistanceDistribution
    r_f: float
    read_voltage: float = DEFAULT_READ_VOLTAGE
    line_resistance: float = 0.0
    rail: float | None = DEFAULT_RAIL
    sense_noise: float = 0.0
    d2d_z: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        self.states = np.asarray(self.states, dtype=np.int8)
        self.resistance = np.asarray(self.resistance, dtype=float)
        self.program_count = np.asarray(self.program_count, dtype=np.int64)
        if self.states.ndim != 2 or 0 in self.states.shape:
            raise ParameterError(f"crossbar grid must be 2-D and non-empty, got {self.states.shape}")
        if self.resistance.shape != self.states.shape or self.program_count.shape != self.states.shape:
            raise ParameterError("cell arrays must share one shape")
        if np.any(~(self.resistance > 0)) or not np.all(np.isfinite(self.resistance)):
            raise ParameterError("all resistances must be finite and positive")
        if self.line_resistance < 0:
            raise ParameterError("line_resistance must be >= 0")
        if not self.r_f > 0:
            raise ParameterError("r_f must be positive")
        if self.d2d_z is None:
            self.d2d_z = np.zeros(self.states.shape)

    @property
    def rows(self):
        return self.states.shape[0]

    @property
    def cols(self):
        return self.states.shape[1]

    @property
    def shape(self):
        return self.states.shape

    def conductance(self):
        """Cell conductances in siemens."""
        return conductance_siemens(self.resistance)

    def cell(self, row, col):
        return DeviceCell(
            DeviceState(int(self.states[row, col])),
            float(self.resistance[row, col]),
            int(self.program_count[row, col]),
            float(self.d2d_z[row, col]),
        )

    def set_cell(self, row, col, cell):
        self.states[row, col] = int(cell.state)
        self.resistance[row, col] = cell.resistance
        self.program_count[row, col] = cell.program_count

    def __eq__(self, other):
        if not isinstance(other, CrossbarState):
            return NotImplemented
        return (
            np.array_equal(self.states, other.states)
            and np.array_equal(self.resistance, other.resistance)
            and np.array_equal(self.program_count, other.program_count)
            and np.array_equal(self.d2d_z, other.d2d_z)
            and (self.dist, self.r_f, self.read_voltage, self.line_resistance, self.rail, self.sense_noise)
            == (other.dist, other.r_f, other.read_voltage, other.line_resistance, other.rail, other.sense_noise)
        )

    def copy(self):
        return CrossbarState(
            self.states.copy(),
            self.resistance.copy(),
            self.program_count.copy(),
            self.dist,
            self.r_f,
            self.read_voltage,
            self.line_resistance,
            self.rail,
            self.sense_noise,
            self.d2d_z.copy(),
        )

    def to_dict(self):
        cells = [
            {
                "row": r,
                "col": c,
                "state": DeviceState(int(self.states[r, c])).name,
                "resistance_mohm": float(self.resistance[r, c]),
                "program_count": int(self.program_count[r, c]),
            }
            for r in range(self.rows)
            for c in range(self.cols)
        ]
        return {
            "rows": self.rows,
            "cols": self.cols,
            "cells": cells,
            "dist_params": self.dist.to_dict(),
            "line_resistance": self.line_resistance,
            "r_f": self.r_f,
            "read_voltage": self.read_voltage,
            "rail": self.rail,
            "sense_noise": self.sense_noise,
            "d2d_z": self.d2d_z.tolist(),
        }

    @classmethod
    def from_dict(cls, d):
        rows, cols = d["rows"], d["cols"]
        states = np.zeros((rows, cols), dtype=np.int8)
        res = np.zeros((rows, cols))
        counts = np.zeros((rows, cols), dtype=np.int64)
        seen = np.zeros((rows, cols), dtype=bool)
        for c in d["cells"]:
            i, j = c["row"], c["col"]
            states[i, j] = DeviceState[c["state"]]
            res[i, j] = c["resistance_mohm"]
            counts[i, j] = c["program_count"]
            seen[i, j] = True
        if not seen.all():
            raise ParameterError("crossbar document does not cover every cell")
        return cls(
            states,
            res,
            counts,
            ResistanceDistribution.from_dict(d["dist_params"]),
            d["r_f"],
            d.get("read_voltage", DEFAULT_READ_VOLTAGE),
            d["line_resistance"],
            d.get("rail", DEFAULT_RAIL),
            d.get("sense_noise", 0.0),
            np.asarray(d["d2d_z"]) if d.get("d2d_z") is not None else None,
        )


def init_crossbar(
    rows,
    cols,
    dist=None,
    rng=None,
    *,
    r_f=None,
    read_voltage=DEFAULT_READ_VOLTAGE,
    line_resistance=0.0,
    rail=DEFAULT_RAIL,
    sense_noise=0.0,
):
    """Build a crossbar with every cell RESET to HRS (one pulse each).

    ``r_f=None`` picks :func:`default_feedback_resistance` for this geometry.
    """
    if rows < 1 or cols < 1:
        raise ParameterError(f"crossbar dimensions must be >= 1, got {rows}x{cols}")
    dist = dist or ResistanceDistribution()
    rng = as_generator(rng)
    d2d = rng.standard_normal((rows, cols)) if dist.variability == Variability.DEVICE else np.zeros((rows, cols))
    res = np.empty((rows, cols))
    for r in range(rows):
        for c in range(cols):
            z = d2d[r, c] if dist.variability == Variability.DEVICE else None
            res[r, c] = sample_resistance(DeviceState.HRS, dist, rng, z=z)
    if r_f is None:
        r_f = default_feedback_resistance(cols, dist, read_voltage, rail if rail is not None else DEFAULT_RAIL)
    return CrossbarState(
        np.zeros((rows, cols), dtype=np.int8),
        res,
        np.ones((rows, cols), dtype=np.int64),
        dist,
        r_f,
        read_voltage,
        line_resistance,
        rail,
        sense_noise,
        d2d,
    )


def program_cell(xbar, row, col, target, rng=None, verify_window=None, max_attempts=10):
    """Program-and-verify one cell in place.

    Pulses the cell toward ``target`` until its resistance lies in
    ``verify_window`` (MOhm, inclusive). Returns the number of pulses used.
    Raises :class:`ProgramFailure` once ``max_attempts`` is spent; the cell
    keeps its last sampled resistance.
    """
    if not (0 <= row < xbar.rows and 0 <= col < xbar.cols):
        raise IndexError(f"cell ({row}, {col}) outside {xbar.rows}x{xbar.cols} crossbar")
    if max_attempts < 1:
        raise ParameterError("max_attempts must be >= 1")
    target = DeviceState(target)
    lo, hi = verify_window if verify_window is not None else xbar.dist.verify_window(target)
    rng = as_generator(rng)
    cell = xbar.cell(row, col)
    for attempt in range(1, max_attempts + 1):
        cell = transition(cell, target, xbar.dist, rng)
        if lo <= cell.resistance <= hi:
            xbar.set_cell(row, col, cell)
            return attempt
    xbar.set_cell(row, col, cell)
    raise ProgramFailure(row, col, target, cell.resistance, max_attempts)


def ideal_read_row(xbar, row, column_voltages):
    """TIA read of one row with every other row ignored.

    Returns ``(row_current, tia_voltage)`` in A and V, without rail clipping.
    """
    if not 0 <= row < xbar.rows:
        raise IndexError(f"row {row} outside crossbar with {xbar.rows} rows")
    v = _column_vector(xbar, column_voltages)
    current = float(np.dot(xbar.conductance()[row], v))
    return current, xbar.r_f * current


def tia_output(xbar, current, rng=None):
    """Convert a sensed row current to the TIA output voltage.

    Returns ``(voltage, clipped)``. Noise is added before clipping.
    """
    v = xbar.r_f * current
    if xbar.sense_noise > 0:
        v += as_generator(rng).normal(0.0, xbar.sense_noise)
    if xbar.rail is not None and abs(v) > xbar.rail:
        return float(np.copysign(xbar.rail, v)), True
    return float(v), False


def sensed_current(xbar, row, column_voltages, mode=IDEAL):
    """Sensed-row current (A) under ``mode``."""
    mode = mode if isinstance(mode, ReadMode) else ReadMode(mode)
    if mode.mode == Mode.IDEAL:
        return ideal_read_row(xbar, row, column_voltages)[0]
    bc = solver.ReadBoundaryConditions(
        np.asarray(column_voltages, dtype=float), row, mode.floating_row_policy.value
    )
    if xbar.line_resistance > 0:
        return solver.solve_read_with_line_resistance(xbar, bc).sensed_row_current
    return solver.solve_read(xbar, bc).sensed_row_current


def read_row(xbar, row, column_voltages, mode=IDEAL, rng=None):
    """Sensed TIA voltage for one row read, clipped at the rail."""
    return tia_output(xbar, sensed_current(xbar, row, column_voltages, mode), rng)[0]


def _column_vector(xbar, column_voltages):
    v = np.asarray(column_voltages, dtype=float)
    if v.shape != (xbar.cols,):
        raise ParameterError(f"expected {xbar.cols} column voltages, got shape {v.shape}")
    return v
