import math
from functools import lru_cache

import numpy as np
import pytest

from moebiuskit.gallery import ExampleSpec, default_window, make_example
from moebiuskit.hypersurface import tensor_grid


@lru_cache(maxsize=None)
def example(example_id: str, theta: float | None = None, n: int = 5):
    params = {} if theta is None else {"theta": theta}
    return make_example(ExampleSpec(example_id, n, params))


def window(example_id: str, n: int = 5):
    return default_window(ExampleSpec(example_id, n))


def grid(example_id: str, counts, n: int = 5) -> np.ndarray:
    return tensor_grid(window(example_id, n), counts)


def interior_point(example_id: str, frac: float = 0.37, n: int = 5) -> np.ndarray:
    return np.array([lo + frac * (hi - lo) for lo, hi in window(example_id, n)])


NON_UMBILIC = ("round_cylinder", "minimal_cylinder", "cone_cylinder", "cartan_example")
THETAS = (math.pi / 6, math.pi / 3, math.pi / 2)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
