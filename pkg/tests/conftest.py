from pathlib import Path

import numpy as np
import pytest

from rramvmm.crossbar import CrossbarState
from rramvmm.device import IDEAL_DISTRIBUTION, ResistanceDistribution
from rramvmm.harness import load_wdbc

ROOT = Path(__file__).resolve().parents[1]
WDBC = ROOT / "data" / "wdbc.data"


@pytest.fixture(scope="session")
def wdbc_path():
    if not WDBC.exists():
        pytest.skip("data/wdbc.data missing; run scripts/export_wdbc.py")
    return WDBC


@pytest.fixture(scope="session")
def wdbc(wdbc_path):
    return load_wdbc(wdbc_path)


def random_crossbar(rng, rows, cols, *, line_resistance=0.0, r_f=1e6, rail=None, lo=0.5, hi=100.0):
    """Crossbar with log-uniform resistances in [lo, hi] MOhm and arbitrary states."""
    res = np.exp(rng.uniform(np.log(lo), np.log(hi), size=(rows, cols)))
    states = (res < 10).astype(np.int8)
    return CrossbarState(
        states, res, np.ones((rows, cols)), ResistanceDistribution(), r_f,
        line_resistance=line_resistance, rail=rail,
    )


@pytest.fixture
def ideal_dist():
    return IDEAL_DISTRIBUTION
