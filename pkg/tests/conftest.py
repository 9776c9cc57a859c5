import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from nlsw import build_grid


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def small_grid():
    return build_grid(0.0, 2.0 * np.pi, 32, 1.0, 100)


def random_field(rng, K):
    return rng.normal(size=K) + 1j * rng.normal(size=K)


def rel_err(value, reference):
    scale = max(abs(reference), 1e-30)
    return abs(value - reference) / scale
