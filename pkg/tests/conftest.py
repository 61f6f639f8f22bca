import numpy as np
import pytest

from csesr.spectrum import BiasField, amplitude_for_depth, compute_resonances, linear_grid

HIGH_WINDOW = (2545.0, 3195.0)


def spaced_field(seed, magnitude=100.0, min_gap=30.0):
    """Random-direction field whose 8 resonances are at least `min_gap` apart."""
    rng = np.random.default_rng(seed)
    while True:
        v = rng.standard_normal(3)
        field = BiasField.from_vector(v / np.linalg.norm(v) * magnitude)
        res = compute_resonances(field)
        if np.min(np.diff(res.centers)) >= min_gap:
            return field


@pytest.fixture
def high_grid():
    return linear_grid(HIGH_WINDOW, 650)


@pytest.fixture
def high_truth():
    field = spaced_field(3)
    return compute_resonances(field, window=HIGH_WINDOW, width=15.0, amplitude=amplitude_for_depth(30.0, 15.0))
