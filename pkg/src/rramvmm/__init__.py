"""Vector-matrix multiplication on binary RRAM crossbars.

Simulates complementary-pair weight mapping of binarized ADALINE classifiers
onto selector-free binary RRAM crossbars, with PWM-encoded inputs, device
variability and nodal-analysis sneak-path reads.
"""

import logging

from .crossbar import IDEAL, SNEAK, CrossbarState, ReadMode, init_crossbar, program_cell, read_row
from .device import DeviceCell, DeviceState, ResistanceDistribution, sample_resistance, transition
from .encoder import fit_normalization, pwm_accumulate, pwm_expand, quantize
from .errors import ParameterError, ProgramFailure
from .harness import ExperimentConfig, load_wdbc, run_experiment, split, sweep
from .io import load_artifacts, save_artifacts
from .mapper import hardware_forward_dataset, plan_mapping, program_plan, schedule_inference
from .solver import ReadBoundaryConditions, solve_read, solve_read_with_line_resistance
from .trainer import evaluate, train

logging.getLogger(__name__).addHandler(logging.NullHandler())

__version__ = "0.1.0"
