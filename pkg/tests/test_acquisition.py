import copy

import numpy as np
import pytest

from csesr.acquisition import (
    ProjectionRecord,
    SimulatedBackend,
    measure_projection,
    run_initial_phase,
    simulated_measure,
)
from csesr.spectrum import ResonanceSet, absorption, synthesize_spectrum

from .conftest import HIGH_WINDOW


def isolated(center=2700.0, width=10.0, amp=50.0):
    far = np.array([3100.0 + 10 * i for i in range(7)])
    return ResonanceSet(np.r_[center, far], width, np.r_[amp, np.zeros(7)])


def test_record_tone_count():
    ProjectionRecord((1.0, 2.0, 3.0, 4.0), 1.0, 1.0, 0)
    with pytest.raises(ValueError):
        ProjectionRecord((), 1.0, 1.0, 0)
    with pytest.raises(ValueError):
        ProjectionRecord((1.0,) * 5, 1.0, 1.0, 0)


def test_out_of_window_rejected(high_truth):
    be = SimulatedBackend(high_truth, HIGH_WINDOW, 1000.0, 1.0, 0)
    with pytest.raises(ValueError):
        be.measure((2500.0,), 0)
    with pytest.raises(ValueError):
        be.measure((2600.0, 3200.0), 0)


def test_far_tones_stay_near_reference():
    res = isolated()
    sigma = 3.0
    be = SimulatedBackend(res, HIGH_WINDOW, 1000.0, sigma, 5)
    counts = np.array([be.measure((2550.0, 2560.0, 2900.0), i) for i in range(2000)])
    assert np.all(np.abs(counts - 1000.0) < 5 * sigma + 1e-3)


def test_on_center_dip():
    res = isolated(amp=50.0)
    be = SimulatedBackend(res, HIGH_WINDOW, 1000.0, 0.0, 0)
    dip = 1000.0 - be.measure((2700.0,), 0)
    assert dip == pytest.approx(50.0 * 2 / (np.pi * 10.0), rel=1e-4)  # far peaks add < 1e-4


def test_two_tones_add():
    res = ResonanceSet(np.array([2600.0, 2700.0, 2800.0, 2900.0, 3000.0, 3050.0, 3100.0, 3150.0]), 10.0, 40.0)
    be = SimulatedBackend(res, HIGH_WINDOW, 1000.0, 0.0, 0)
    d1 = 1000.0 - be.measure((2600.0,), 0)
    d2 = 1000.0 - be.measure((2800.0,), 1)
    d12 = 1000.0 - be.measure((2600.0, 2800.0), 2)
    assert d12 == pytest.approx(d1 + d2, rel=1e-12)


def test_deterministic_by_index(high_truth):
    a = SimulatedBackend(high_truth, HIGH_WINDOW, 1000.0, 2.0, 42)
    b = SimulatedBackend(high_truth, HIGH_WINDOW, 1000.0, 2.0, 42)
    # order of access does not matter, only the sequence index
    xs = [a.measure((2700.0,), i) for i in range(50)]
    ys = [b.measure((2700.0,), i) for i in reversed(range(50))][::-1]
    assert xs == ys
    assert a.measure_reference(7) == b.measure_reference(7)
    c = SimulatedBackend(high_truth, HIGH_WINDOW, 1000.0, 2.0, 43)
    assert c.measure((2700.0,), 0) != xs[0]
    assert simulated_measure(a, (2700.0,), 3) == xs[3]


def test_raster_matches_synthesized_spectrum(high_truth, high_grid):
    be = SimulatedBackend(high_truth, HIGH_WINDOW, 1000.0, 0.0, 0)
    counts = np.array([be.measure((f,), i) for i, f in enumerate(high_grid)])
    spec = synthesize_spectrum(high_truth, high_grid, 1000.0, np.inf, 0)
    np.testing.assert_array_equal(counts, spec.clean_counts)
    np.testing.assert_array_equal(counts, 1000.0 - absorption(high_grid, high_truth))


def test_truth_not_mutated(high_truth, high_grid):
    before = copy.deepcopy(high_truth)
    be = SimulatedBackend(high_truth, HIGH_WINDOW, 1000.0, 1.0, 0)
    rng = np.random.default_rng(0)
    run_initial_phase(be, high_grid, 20, 3, rng)
    for i in range(30):
        measure_projection(be, high_grid, [i, i + 100], 20 + i)
    for name in ("centers", "widths", "amplitudes"):
        np.testing.assert_array_equal(getattr(high_truth, name), getattr(before, name))


class TestInitialPhase:
    def test_noiseless(self, high_truth, high_grid):
        be = SimulatedBackend(high_truth, HIGH_WINDOW, 1000.0, 0.0, 0)
        base = run_initial_phase(be, high_grid, 10, 3, np.random.default_rng(1))
        assert base.reference_mean == 1000.0
        assert base.noise_sigma == 0.0
        assert [r.sequence_index for r in base.records] == list(range(10))
        assert all(len(r.applied_frequencies) == 3 for r in base.records)

    def test_reference_mean(self, high_truth, high_grid):
        sigma = 4.0
        hits = 0
        for seed in range(20):
            be = SimulatedBackend(high_truth, HIGH_WINDOW, 1000.0, sigma, seed)
            base = run_initial_phase(be, high_grid, 100, 2, np.random.default_rng(seed))
            hits += abs(base.reference_mean - 1000.0) <= 3 * sigma / 10
            assert base.noise_sigma == pytest.approx(sigma, rel=0.3)
        assert hits >= 19  # 3-sigma bound fails with probability 0.003 per seed

    def test_minimum_size(self, high_truth, high_grid):
        be = SimulatedBackend(high_truth, HIGH_WINDOW, 1000.0, 0.0, 0)
        with pytest.raises(ValueError):
            run_initial_phase(be, high_grid, 3, 3, np.random.default_rng(0))
