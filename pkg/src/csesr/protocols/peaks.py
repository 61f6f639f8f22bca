"""Peak lists, peak extraction from sparse amplitudes, and the stopping rule."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

N_RESONANCES = 8


@dataclass(frozen=True)
class PeakList:
    centers: np.ndarray = field(default_factory=lambda: np.zeros(0))
    widths: np.ndarray = field(default_factory=lambda: np.zeros(0))
    amplitudes: np.ndarray | None = None

    def __post_init__(self):
        c = np.asarray(self.centers, dtype=float).ravel()
        w = np.asarray(self.widths, dtype=float).ravel()
        if c.shape != w.shape:
            raise ValueError("centers and widths must have equal length")
        order = np.argsort(c, kind="stable")
        object.__setattr__(self, "centers", c[order])
        object.__setattr__(self, "widths", w[order])
        if self.amplitudes is not None:
            a = np.asarray(self.amplitudes, dtype=float).ravel()
            object.__setattr__(self, "amplitudes", a[order])
        if np.any(self.widths <= 0):
            raise ValueError("peak widths must be positive")

    @property
    def found_count(self) -> int:
        return int(self.centers.size)

    def __len__(self):
        return self.found_count


def detect_peaks(a_hat, dictionary, threshold_fraction: float = 0.1, merge_gap: float = 2.0,
                 min_mass_fraction: float = 0.0) -> PeakList:
    """Group the significant amplitudes into peaks.

    Entries below ``threshold_fraction * max(a_hat)`` are dropped; each run
    of consecutive surviving candidates is a cluster, and clusters whose
    edges are closer than ``merge_gap`` coarse candidate spacings are
    merged. A cluster becomes one peak at its amplitude-weighted centroid.
    Its width is the weighted mean atom width plus twice the weighted
    spread of the cluster. Clusters carrying less than
    ``min_mass_fraction`` of the heaviest cluster's mass are discarded as
    noise.
    """
    a = np.asarray(a_hat, dtype=float)
    nu = dictionary.candidate_grid
    atom_w = dictionary.widths
    top = float(a.max()) if a.size else 0.0
    if top <= 0.0:
        return PeakList()
    keep = a >= threshold_fraction * top
    idx = np.flatnonzero(keep)
    # split into runs of adjacent candidate indices
    breaks = np.flatnonzero(np.diff(idx) > 1) + 1
    runs = np.split(idx, breaks)

    merged = [runs[0]]
    limit = merge_gap * dictionary.base_spacing
    for run in runs[1:]:
        if nu[run[0]] - nu[merged[-1][-1]] < limit:
            merged[-1] = np.concatenate([merged[-1], run])
        else:
            merged.append(run)

    centers, widths, masses = [], [], []
    for run in merged:
        wts = a[run]
        mass = wts.sum()
        c = float(np.dot(wts, nu[run]) / mass)
        spread = float(np.sqrt(max(np.dot(wts, (nu[run] - c) ** 2) / mass, 0.0)))
        centers.append(c)
        widths.append(float(np.dot(wts, atom_w[run]) / mass) + 2.0 * spread)
        masses.append(float(mass))
    masses = np.array(masses)
    keep = masses >= min_mass_fraction * masses.max()
    return PeakList(np.array(centers)[keep], np.array(widths)[keep], masses[keep])


def max_deviation(a: PeakList, b: PeakList) -> float:
    if a.found_count != b.found_count:
        return np.inf
    return float(np.max(np.abs(a.centers - b.centers))) if a.found_count else 0.0


@dataclass
class ConvergenceState:
    """Counts consecutive agreeing reconstructions with the full peak count.

    A reconstruction is a hit when it has `n_peaks` peaks and lies within
    `tolerance` (MHz, per peak) of every reconstruction in the current
    streak. Any other reconstruction resets the count to 0; one with the
    right peak count is kept as the reference for the next streak.
    """

    tolerance: float = 2.0
    required_consecutive: int = 4
    n_peaks: int = N_RESONANCES
    consecutive_hits: int = 0
    history: list = field(default_factory=list)

    def update(self, peaks: PeakList) -> bool:
        """Feed one reconstruction; return True once the streak is long enough."""
        if peaks.found_count != self.n_peaks:
            self.reset()
            return False
        if all(max_deviation(peaks, old) <= self.tolerance for old in self.history):
            self.consecutive_hits = min(self.consecutive_hits + 1, self.required_consecutive)
        else:
            self.consecutive_hits = 0
            self.history = []
        self.history.append(peaks)
        self.history = self.history[-self.required_consecutive :]
        return self.converged

    def reset(self) -> None:
        self.consecutive_hits = 0
        self.history = []

    @property
    def converged(self) -> bool:
        return self.consecutive_hits >= self.required_consecutive

    @property
    def latest(self) -> PeakList | None:
        return self.history[-1] if self.history else None
