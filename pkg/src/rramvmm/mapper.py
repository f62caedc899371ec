"""Complementary-pair weight mapping and inference scheduling.

Each logical weight occupies two devices in consecutive rows of one column:
the plus row holds LRS for +1 and HRS for -1, the minus row the opposite.
Weight vectors longer than the column count are split into partitions, one
row pair per (class, partition). Row pairs are packed class-major into
phases; each phase is one full programming of the physical crossbar.

At inference every resident row is read with the PWM-encoded slice of the
input; per-partition outputs are summed per (class, polarity), the minus sum
is subtracted from the plus sum, and the largest class score wins.
"""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import solver
from .crossbar import IDEAL, Mode, ReadMode, init_crossbar, program_cell
from .device import DeviceState, ResistanceDistribution
from .encoder import LEVELS, pwm_accumulate, pwm_expand
from .errors import ParameterError, ProgramFailure
from .rng import as_generator

# relative tolerance under which two analog class scores count as a tie
TIE_RTOL = 1e-9


class Polarity(enum.IntEnum):
    PLUS = 0
    MINUS = 1


@dataclass(frozen=True)
class WeightSlot:
    k: int
    polarity: Polarity
    p: int
    row: int
    col: int
    phase: int
    logical_weight: int

    @property
    def target(self):
        lrs = (self.logical_weight > 0) == (self.polarity == Polarity.PLUS)
        return DeviceState.LRS if lrs else DeviceState.HRS

    def to_dict(self):
        d = asdict(self)
        d["polarity"] = Polarity(self.polarity).name
        d["target"] = self.target.name
        return d

    @classmethod
    def from_dict(cls, d):
        return cls(
            int(d["k"]),
            Polarity[d["polarity"]],
            int(d["p"]),
            int(d["row"]),
            int(d["col"]),
            int(d["phase"]),
            int(d["logical_weight"]),
        )


@dataclass
class MappingPlan:
    slots: list
    n_partitions: int
    phases: int
    rows: int
    cols: int
    n_classes: int
    n_features: int

    @property
    def crossbar_dims(self):
        return (self.rows, self.cols)

    def partition_bounds(self, p):
        """Feature index range ``[start, stop)`` of partition ``p``."""
        start = p * self.cols
        return start, min(start + self.cols, self.n_features)

    def row_assignments(self):
        """``{(phase, row): (k, polarity, p)}`` for every occupied row."""
        out = {}
        for s in self.slots:
            out[(s.phase, s.row)] = (s.k, s.polarity, s.p)
        return dict(sorted(out.items()))

    def target_states(self, phase):
        """Per-cell target states of one phase; unused cells stay HRS."""
        t = np.full((self.rows, self.cols), int(DeviceState.HRS), dtype=np.int8)
        for s in self.slots:
            if s.phase == phase:
                t[s.row, s.col] = int(s.target)
        return t

    def to_dict(self):
        return {
            "slots": [s.to_dict() for s in self.slots],
            "n_partitions": self.n_partitions,
            "phases": self.phases,
            "rows": self.rows,
            "cols": self.cols,
            "n_classes": self.n_classes,
            "n_features": self.n_features,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            [WeightSlot.from_dict(s) for s in d["slots"]],
            int(d["n_partitions"]),
            int(d["phases"]),
            int(d["rows"]),
            int(d["cols"]),
            int(d["n_classes"]),
            int(d["n_features"]),
        )

    def __eq__(self, other):
        return isinstance(other, MappingPlan) and self.to_dict() == other.to_dict()


def phase_count(n_classes, n_features, rows, cols):
    return math.ceil(n_classes * math.ceil(n_features / cols) / (rows // 2))


def plan_mapping(binary_weights, rows, cols):
    """Place a K x F matrix of +-1 weights on an ``rows`` x ``cols`` crossbar."""
    w = np.atleast_2d(np.asarray(binary_weights))
    if rows < 2:
        raise ParameterError("complementary mapping needs at least 2 rows")
    if cols < 1:
        raise ParameterError("crossbar needs at least 1 column")
    if not np.all(np.isin(w, (-1, 1))):
        raise ParameterError("weights must be +1 or -1")
    k_classes, n_features = w.shape
    n_parts = math.ceil(n_features / cols)
    capacity = rows // 2
    slots = []
    pair = 0
    for k in range(k_classes):
        for p in range(n_parts):
            phase, local = divmod(pair, capacity)
            start = p * cols
            for col, f in enumerate(range(start, min(start + cols, n_features))):
                for pol in Polarity:
                    slots.append(WeightSlot(k, pol, p, 2 * local + pol, col, phase, int(w[k, f])))
            pair += 1
    phases = math.ceil(pair / capacity) if pair else 0
    return MappingPlan(slots, n_parts, phases, rows, cols, k_classes, n_features)


@dataclass
class ProgrammingReport:
    """Per-cell outcome of programming LRS targets (HRS cells keep their init state)."""

    entries: list = field(default_factory=list)

    @property
    def failures(self):
        return [e for e in self.entries if not e["ok"]]

    @property
    def total_attempts(self):
        return sum(e["attempts"] for e in self.entries)

    def summary(self):
        return {
            "programmed": len(self.entries),
            "failures": len(self.failures),
            "total_attempts": self.total_attempts,
        }

    def to_dict(self):
        return {"entries": list(self.entries)}

    @classmethod
    def from_dict(cls, d):
        return cls(list(d["entries"]))


def program_plan(
    plan,
    dist=None,
    rng=None,
    *,
    window_factor=1.5,
    max_attempts=10,
    on_failure="accept",
    **crossbar_kwargs,
):
    """Program every phase of ``plan`` onto a fresh crossbar.

    Each phase starts from an all-HRS initialization and then only LRS
    targets are written with program-and-verify. ``on_failure`` is
    ``"accept"`` (log the stuck cell and keep going) or ``"abort"``.
    Extra keyword arguments go to :func:`init_crossbar`.
    """
    if on_failure not in ("accept", "abort"):
        raise ParameterError("on_failure must be 'accept' or 'abort'")
    dist = dist or ResistanceDistribution()
    rng = as_generator(rng)
    window = dist.verify_window(DeviceState.LRS, window_factor)
    report = ProgrammingReport()
    crossbars = []
    for phase in range(max(plan.phases, 1)):
        xbar = init_crossbar(plan.rows, plan.cols, dist, rng, **crossbar_kwargs)
        targets = plan.target_states(phase) if plan.phases else np.zeros(xbar.shape, dtype=np.int8)
        for r, c in zip(*np.nonzero(targets == int(DeviceState.LRS))):
            entry = {"phase": phase, "row": int(r), "col": int(c), "target": "LRS"}
            try:
                entry["attempts"] = program_cell(xbar, r, c, DeviceState.LRS, rng, window, max_attempts)
                entry["ok"] = True
            except ProgramFailure as e:
                if on_failure == "abort":
                    raise
                entry["attempts"] = e.attempts
                entry["ok"] = False
            entry["resistance_mohm"] = float(xbar.resistance[r, c])
            report.entries.append(entry)
        crossbars.append(xbar)
    return crossbars, report


@dataclass
class ClassScore:
    partial: np.ndarray  # (K, 2, n_partitions)
    polarity_sums: np.ndarray  # (K, 2)
    score: np.ndarray  # (K,)
    decision: int


def decide(score, partial):
    """Lowest class index whose score is within float tolerance of the max."""
    scale = float(np.max(np.abs(partial))) if np.size(partial) else 0.0
    best = float(np.max(score))
    return int(np.argmax(score >= best - TIE_RTOL * scale))


def assemble(partial):
    """Sum partitions per polarity, subtract, and decide."""
    sums = partial.sum(axis=2)
    score = sums[:, Polarity.PLUS] - sums[:, Polarity.MINUS]
    return ClassScore(partial, sums, score, decide(score, partial))


def _check_inputs(plan, crossbars, n_features):
    if n_features != plan.n_features:
        raise ParameterError(f"input has {n_features} features, plan expects {plan.n_features}")
    if len(crossbars) < plan.phases:
        raise ParameterError(f"plan has {plan.phases} phases, got {len(crossbars)} crossbars")


def schedule_inference(plan, crossbars, q, mode=IDEAL, rng=None, diagnostics=None):
    """Run one quantized sample through the programmed phases, cycle by cycle."""
    q = np.asarray(q)
    _check_inputs(plan, crossbars, q.size)
    partial = np.zeros((plan.n_classes, 2, plan.n_partitions))
    for (phase, row), (k, pol, p) in plan.row_assignments().items():
        xbar = crossbars[phase]
        start, stop = plan.partition_bounds(p)
        x = np.zeros(plan.cols, dtype=np.int64)
        x[: stop - start] = q[start:stop]
        trace = pwm_expand(x, xbar.read_voltage)
        partial[k, pol, p] = pwm_accumulate(xbar, row, trace, mode, rng, diagnostics)
    return assemble(partial)


def _accumulate_batch(xbar, h, values, rng):
    """Vectorized PWM accumulation of one row for a batch of inputs.

    ``h`` is the row's transconductance per column and ``values`` an (N, C)
    integer array. Thermometer coding means the active set during cycles
    ``[s_{j-1}, s_j)`` of the sorted values is the features ranked ``>= j``.
    Returns ``(totals, clipped_cycles)``.
    """
    order = np.argsort(values, axis=1, kind="stable")
    s = np.take_along_axis(values, order, axis=1).astype(float)
    counts = np.diff(s, axis=1, prepend=0.0)
    hs = h[order]
    suffix = np.cumsum(hs[:, ::-1], axis=1)[:, ::-1]
    v = xbar.r_f * xbar.read_voltage * suffix
    clipped = 0
    if xbar.rail is not None:
        over = np.abs(v) > xbar.rail
        clipped = int(np.sum(counts * over))
        v = np.clip(v, -xbar.rail, xbar.rail)
    totals = np.sum(counts * v, axis=1)
    if xbar.sense_noise > 0:
        totals = totals + rng.normal(0.0, xbar.sense_noise * math.sqrt(LEVELS), size=totals.shape)
    return totals, clipped


def hardware_forward_dataset(plan, crossbars, q_batch, mode=IDEAL, rng=None):
    """Classify a batch of quantized samples on the programmed crossbars.

    Crossbars are read-only here: program once, infer many. Each occupied row
    is reduced to its transconductance vector (one factorization in sneak
    mode), then all samples are accumulated at once.

    Returns ``(predictions, scores, diagnostics)``.
    """
    mode = mode if isinstance(mode, ReadMode) else ReadMode(mode)
    q_batch = np.atleast_2d(np.asarray(q_batch, dtype=np.int64))
    _check_inputs(plan, crossbars, q_batch.shape[1])
    rng = as_generator(rng)
    n = q_batch.shape[0]
    partial = np.zeros((n, plan.n_classes, 2, plan.n_partitions))
    diag = {"clipped_cycles": 0, "factorizations": 0, "max_kcl_residual": 0.0,
            "floating_voltage_range": None}
    policy = mode.floating_row_policy.value
    lo = hi = None
    for (phase, row), (k, pol, p) in plan.row_assignments().items():
        xbar = crossbars[phase]
        start, stop = plan.partition_bounds(p)
        values = np.zeros((n, plan.cols), dtype=np.int64)
        values[:, : stop - start] = q_batch[:, start:stop]
        if mode.mode == Mode.IDEAL:
            h = xbar.conductance()[row]
        else:
            h = solver.transfer_vector(xbar, row, policy)
            diag["factorizations"] += 1
            bc = solver.ReadBoundaryConditions(np.full(xbar.cols, xbar.read_voltage), row, policy)
            sol = (solver.solve_read_with_line_resistance if xbar.line_resistance > 0 else solver.solve_read)(xbar, bc)
            diag["max_kcl_residual"] = max(diag["max_kcl_residual"], sol.kcl_residual)
            others = np.delete(sol.row_node_voltages, row)
            if others.size:
                lo = float(others.min()) if lo is None else min(lo, float(others.min()))
                hi = float(others.max()) if hi is None else max(hi, float(others.max()))
        totals, clipped = _accumulate_batch(xbar, h, values, rng)
        partial[:, k, pol, p] = totals
        diag["clipped_cycles"] += clipped
    if lo is not None:
        diag["floating_voltage_range"] = [lo, hi]
    scores = [assemble(partial[i]) for i in range(n)]
    preds = np.array([s.decision for s in scores], dtype=np.int64)
    return preds, scores, diag
