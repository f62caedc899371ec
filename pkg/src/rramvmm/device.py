"""Binary OxRAM device model.

A device holds one of two logical states (HRS or LRS) and a physical
resistance drawn from a lognormal distribution around the state's median.
Resistances are kept in MOhm throughout; conversion to siemens happens only in
:func:`conductance_siemens`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ParameterError
from .rng import as_generator

MOHM = 1e6

# Programming pulse amplitudes of the reference testbench. Recorded for
# reporting only; switching dynamics are not modelled.
V_SET = 3.3
V_RESET = -5.5
V_READ = -0.8


class DeviceState(enum.IntEnum):
    HRS = 0
    LRS = 1


class Variability(str, enum.Enum):
    """How programming variability is drawn.

    ``CYCLE`` re-samples on every programming pulse. ``DEVICE`` fixes one
    z-score per device at fabrication, so re-programming returns the same value.
    """

    CYCLE = "cycle"
    DEVICE = "device"


def conductance_siemens(resistance_mohm):
    """Convert resistance in MOhm to conductance in S."""
    return 1.0 / (np.asarray(resistance_mohm, dtype=float) * MOHM)


@dataclass(frozen=True)
class ResistanceDistribution:
    """Lognormal LRS/HRS resistance statistics.

    Medians are in MOhm, sigmas are standard deviations of ln(R). The defaults
    are placeholders; they are not calibrated against measured devices.
    """

    median_lrs: float = 2.0
    median_hrs: float = 50.0
    sigma_lrs: float = 0.15
    sigma_hrs: float = 0.15
    variability: Variability = Variability.CYCLE
    max_overlap: float = 1e-3

    def __post_init__(self):
        object.__setattr__(self, "variability", Variability(self.variability))
        if not (self.median_lrs > 0 and self.median_hrs > self.median_lrs):
            raise ParameterError(
                f"need median_hrs > median_lrs > 0, got {self.median_hrs}, {self.median_lrs}"
            )
        if self.sigma_lrs < 0 or self.sigma_hrs < 0:
            raise ParameterError("sigmas must be non-negative")
        p = self.overlap_probability()
        if p >= self.max_overlap:
            raise ParameterError(
                f"LRS/HRS populations overlap: P(R_lrs > R_hrs) = {p:.3g} >= {self.max_overlap}"
            )

    def median(self, state):
        return self.median_lrs if DeviceState(state) == DeviceState.LRS else self.median_hrs

    def sigma(self, state):
        return self.sigma_lrs if DeviceState(state) == DeviceState.LRS else self.sigma_hrs

    def overlap_probability(self):
        """P(sample_LRS > sample_HRS) for independent draws."""
        s = math.hypot(self.sigma_lrs, self.sigma_hrs)
        gap = math.log(self.median_hrs) - math.log(self.median_lrs)
        if s == 0:
            return 0.0
        return 0.5 * math.erfc(gap / (s * math.sqrt(2)))

    def verify_window(self, state, factor=1.5):
        """Default program-and-verify window ``[median/factor, median*factor]``."""
        m = self.median(state)
        return (m / factor, m * factor)

    def with_sigma(self, sigma):
        return replace(self, sigma_lrs=sigma, sigma_hrs=sigma)

    def to_dict(self):
        return {
            "median_lrs": self.median_lrs,
            "median_hrs": self.median_hrs,
            "sigma_lrs": self.sigma_lrs,
            "sigma_hrs": self.sigma_hrs,
            "variability": self.variability.value,
            "max_overlap": self.max_overlap,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


IDEAL_DISTRIBUTION = ResistanceDistribution(sigma_lrs=0.0, sigma_hrs=0.0)


@dataclass(frozen=True)
class DeviceCell:
    state: DeviceState = DeviceState.HRS
    resistance: float = IDEAL_DISTRIBUTION.median_hrs
    program_count: int = 0
    # fixed device-to-device offset, used only with Variability.DEVICE
    d2d_z: float = field(default=0.0, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "state", DeviceState(self.state))
        if not self.resistance > 0 or not math.isfinite(self.resistance):
            raise ParameterError(f"resistance must be finite and positive, got {self.resistance}")

    @property
    def conductance(self):
        """Conductance in siemens."""
        return 1.0 / (self.resistance * MOHM)


def sample_resistance(state, dist, rng=None, z=None):
    """Draw one resistance (MOhm) for ``state``.

    ``z`` overrides the standard-normal draw; this is how device-to-device
    variability reuses a fixed per-device offset.
    """
    state = DeviceState(state)
    sigma = dist.sigma(state)
    if z is None:
        z = as_generator(rng).standard_normal() if sigma > 0 else 0.0
    return float(dist.median(state) * math.exp(sigma * z))


def transition(cell, target, dist, rng=None):
    """Apply one programming pulse driving ``cell`` to ``target``.

    Every pulse re-samples the resistance and counts toward ``program_count``,
    including pulses that leave the logical state unchanged.
    """
    z = cell.d2d_z if dist.variability == Variability.DEVICE else None
    r = sample_resistance(target, dist, rng, z=z)
    return replace(cell, state=DeviceState(target), resistance=r, program_count=cell.program_count + 1)
