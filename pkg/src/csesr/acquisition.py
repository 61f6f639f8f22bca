"""Measurement backends and the initial baseline phase of a trial."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol, Sequence

import numpy as np

from .dictionary import draw_projection
from .spectrum import ResonanceSet, absorption

_BLOCK = 1024


@dataclass(frozen=True)
class ProjectionRecord:
    applied_frequencies: tuple
    signal_count: float
    reference_count: float | None
    sequence_index: int
    grid_indices: tuple = ()

    def __post_init__(self):
        if not 1 <= len(self.applied_frequencies) <= 4:
            raise ValueError("a projection applies between 1 and 4 tones")


class MeasurementBackend(Protocol):
    """What a protocol needs from an instrument.

    `index` is the position of the measurement in the trial; simulated
    backends derive their noise from it, hardware drivers may ignore it.
    """

    window: tuple

    def measure(self, frequencies: Sequence[float], index: int) -> float: ...

    def measure_reference(self, index: int) -> float: ...


class _IndexedNormal:
    """Standard normal draws addressable by index, reproducible per seed."""

    def __init__(self, seed_seq: np.random.SeedSequence):
        self._rng = np.random.default_rng(seed_seq)
        self._buf = np.empty(0)

    def __getitem__(self, i: int) -> float:
        if i < 0:
            raise IndexError(i)
        while i >= self._buf.size:
            self._buf = np.concatenate([self._buf, self._rng.standard_normal(_BLOCK)])
        return float(self._buf[i])


class SimulatedBackend:
    """Noisy ESR measurements of a known resonance set.

    Dips from simultaneous tones add linearly. Signal and reference noise
    come from two independent streams indexed by measurement position, so
    two protocols driving equal-seed backends see the same noise at the
    same index.
    """

    def __init__(self, resonances: ResonanceSet, window, reference_power: float, noise_sigma: float, seed: int):
        if noise_sigma < 0:
            raise ValueError("noise_sigma must be nonnegative")
        self.resonances = resonances
        self.window = (float(window[0]), float(window[1]))
        self.reference_power = float(reference_power)
        self.noise_sigma = float(noise_sigma)
        sig, ref = np.random.SeedSequence(seed).spawn(2)
        self._signal_noise = _IndexedNormal(sig)
        self._reference_noise = _IndexedNormal(ref)
        self.n_measurements = 0

    def expected_count(self, frequencies) -> float:
        freqs = np.atleast_1d(np.asarray(frequencies, dtype=float))
        lo, hi = self.window
        if np.any(freqs < lo) or np.any(freqs > hi):
            raise ValueError(f"frequency outside window {lo}..{hi} MHz: {freqs}")
        return self.reference_power - float(np.sum(absorption(freqs, self.resonances)))

    def measure(self, frequencies, index: int) -> float:
        mean = self.expected_count(frequencies)
        self.n_measurements += 1
        return mean + self.noise_sigma * self._signal_noise[index]

    def measure_reference(self, index: int) -> float:
        return self.reference_power + self.noise_sigma * self._reference_noise[index]


def simulated_measure(backend: SimulatedBackend, frequencies, index: int = 0) -> float:
    return backend.measure(frequencies, index)


def measure_projection(backend, grid, indices, index: int, with_reference: bool = True) -> ProjectionRecord:
    freqs = tuple(float(grid[i]) for i in indices)
    signal = backend.measure(freqs, index)
    ref = backend.measure_reference(index) if with_reference else None
    return ProjectionRecord(freqs, signal, ref, index, tuple(int(i) for i in indices))


@dataclass
class Baseline:
    records: list
    reference_mean: float
    noise_sigma: float
    references: list


def run_initial_phase(backend, grid, n_initial: int, tones: int, rng: np.random.Generator) -> Baseline:
    """Random projections with a reference each, to fix the count baseline.

    Returns the records, the mean reference count, and the sample standard
    deviation of the references as the noise estimate.
    """
    if n_initial < 4:
        raise ValueError("the initial phase needs at least 4 projections")
    records = []
    for i in range(n_initial):
        idx = draw_projection(rng, len(grid), tones)
        records.append(measure_projection(backend, grid, idx, i))
    refs = [r.reference_count for r in records]
    return Baseline(records, float(np.mean(refs)), float(np.std(refs, ddof=1)), refs)
