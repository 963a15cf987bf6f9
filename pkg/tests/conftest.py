import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from weightscape import ForecastPanel


@pytest.fixture
def rng():
    return np.random.default_rng(20260809)


@pytest.fixture
def small_panel(rng):
    """T=6, S=2 panel drawn once from the seeded generator."""
    F = rng.standard_normal((6, 2)) + 0.4
    y = F @ np.array([0.7, 0.5]) + 0.25 * rng.standard_normal(6)
    return ForecastPanel(y=y, F=F, q=np.array([2.0, 3.0]))


def make_panel(rng, T=40, S=3, noise=0.3, q=None):
    F = rng.standard_normal((T, S)) + 0.5
    w_true = rng.uniform(0.1, 0.9, size=S)
    y = F @ w_true + noise * rng.standard_normal(T)
    return ForecastPanel(y=y, F=F, q=q)
