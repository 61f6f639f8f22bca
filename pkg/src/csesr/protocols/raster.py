"""Raster-scan baseline: single-tone sweep followed by a multi-Lorentzian fit."""

from __future__ import annotations

import numpy as np

from .cs import CONVERGED, MAX_MEASUREMENTS, make_outcome
from .fitting import fit_lorentzians
from .peaks import N_RESONANCES, PeakList


def subsample_indices(n_grid: int, n_points: int) -> np.ndarray:
    """`n_points` evenly spread indices into a grid of `n_grid` points."""
    if not 1 <= n_points <= n_grid:
        raise ValueError(f"cannot take {n_points} points from a {n_grid}-point grid")
    return np.unique(np.round(np.linspace(0, n_grid - 1, n_points)).astype(int))


def raster_sweep(backend, grid, n_points: int):
    """Measure the sub-sampled sweep; returns (frequencies, counts).

    Each point is measured with its full-grid index as the sequence index,
    so sub-sampled sweeps read the same noise as the full sweep would at
    those frequencies.
    """
    grid = np.asarray(grid, dtype=float)
    idx = subsample_indices(grid.size, n_points)
    counts = np.array([backend.measure((grid[i],), int(i)) for i in idx])
    return grid[idx], counts


def run_raster_trial(backend, grid, n_points: int, linewidth: float, truth=None, sweep=None):
    """Raster scan with `n_points` linearly spaced single-tone measurements.

    Success requires a converged fit with 8 resolved peaks inside the
    window. A precomputed ``sweep=(freqs, counts)`` skips the measurement.
    """
    if n_points < N_RESONANCES:
        raise ValueError("a raster scan needs at least 8 points")
    grid = np.asarray(grid, dtype=float)
    freqs, counts = raster_sweep(backend, grid, n_points) if sweep is None else sweep
    window = (float(grid[0]), float(grid[-1]))
    if freqs.size < 3 * N_RESONANCES:
        outcome = make_outcome(PeakList(), freqs.size, MAX_MEASUREMENTS, truth)
        outcome.message = "too few points to fit 8 peaks"
        return outcome
    fit = fit_lorentzians(freqs, counts, N_RESONANCES, linewidth=linewidth, window=window)
    peaks = fit.peaks if fit.success else PeakList()
    outcome = make_outcome(peaks, freqs.size, CONVERGED if fit.success else MAX_MEASUREMENTS, truth)
    outcome.message = fit.message
    return outcome
