"""Overcomplete Lorentzian dictionaries and random sampling matrices."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .spectrum import lorentzian


@dataclass(frozen=True)
class Dictionary:
    """Lorentzian basis sampled on a measurement grid.

    ``matrix[j, k]`` is the area-normalized Lorentzian centred on
    ``candidate_grid[k]`` with FWHM ``widths[k]``, evaluated at
    ``measurement_grid[j]``.
    """

    measurement_grid: np.ndarray
    candidate_grid: np.ndarray
    widths: np.ndarray
    matrix: np.ndarray
    base_spacing: float

    @property
    def shape(self):
        return self.matrix.shape

    @property
    def n_candidates(self) -> int:
        return self.candidate_grid.size

    def atoms_at(self, freqs) -> np.ndarray:
        """Dictionary rows evaluated at arbitrary frequencies."""
        freqs = np.atleast_1d(np.asarray(freqs, dtype=float))
        return lorentzian(freqs[:, None], self.candidate_grid[None, :], self.widths[None, :])


def build_dictionary(measurement_grid, candidate_grid, widths, base_spacing=None) -> Dictionary:
    nu_j = np.asarray(measurement_grid, dtype=float)
    nu_k = np.asarray(candidate_grid, dtype=float)
    if nu_j.size == 0 or nu_k.size == 0:
        raise ValueError("grids must be nonempty")
    w = np.asarray(widths, dtype=float)
    if w.ndim == 0:
        w = np.full(nu_k.shape, float(w))
    if w.shape != nu_k.shape:
        raise ValueError("need one width per candidate or a single shared width")
    if np.any(w <= 0):
        raise ValueError("widths must be positive")
    if base_spacing is None:
        base_spacing = float(np.min(np.abs(np.diff(np.sort(nu_k))))) if nu_k.size > 1 else 1.0
    mat = lorentzian(nu_j[:, None], nu_k[None, :], w[None, :])
    for arr in (nu_j, nu_k, w, mat):
        arr.setflags(write=False)
    return Dictionary(nu_j, nu_k, w, mat, float(base_spacing))


def candidate_grid(window, spacing: float = 1.0) -> np.ndarray:
    lo, hi = window
    n = int(round((hi - lo) / spacing)) + 1
    return lo + spacing * np.arange(n)


def refine_dictionary(dic: Dictionary, peaks, *, factor: int = 4, span: float = 2.0) -> Dictionary:
    """Densify the candidate grid around converged peaks.

    Inside ``center +/- span * width`` of each peak the candidate spacing is
    divided by `factor` and the atoms take that peak's width estimate; the
    coarse candidates elsewhere are kept as a backbone with their original
    widths. `peaks` is anything with ``centers`` and ``widths`` arrays.
    """
    centers = np.asarray(getattr(peaks, "centers", ()), dtype=float)
    if centers.size == 0:
        return dic
    widths = np.asarray(peaks.widths, dtype=float)
    coarse = dic.candidate_grid
    origin = float(np.min(coarse))
    fine_step = dic.base_spacing / factor
    lo_all, hi_all = float(np.min(coarse)), float(np.max(coarse))

    near = np.zeros(coarse.size, dtype=bool)
    fine_pts, fine_w = [], []
    for c, w in zip(centers, widths):
        lo = max(c - span * w, lo_all)
        hi = min(c + span * w, hi_all)
        near |= (coarse >= lo) & (coarse <= hi)
        m0 = int(np.ceil((lo - origin) / fine_step - 1e-9))
        m1 = int(np.floor((hi - origin) / fine_step + 1e-9))
        pts = origin + fine_step * np.arange(m0, m1 + 1)
        fine_pts.append(pts)
        fine_w.append(np.full(pts.size, w))

    cand = np.concatenate([coarse[~near]] + fine_pts)
    wid = np.concatenate([dic.widths[~near]] + fine_w)
    # overlapping neighbourhoods produce repeats; keep the first occurrence
    order = np.argsort(cand, kind="stable")
    cand, wid = cand[order], wid[order]
    keep = np.concatenate([[True], np.diff(cand) > fine_step * 1e-6])
    return build_dictionary(dic.measurement_grid, cand[keep], wid[keep], dic.base_spacing)


@dataclass
class SamplingMatrix:
    """Which measurement-grid frequencies each projection applied."""

    n_frequencies: int
    rows: list = field(default_factory=list)

    def append(self, indices) -> None:
        idx = np.asarray(indices, dtype=np.intp)
        if idx.size < 1 or idx.size > 4:
            raise ValueError("a projection applies between 1 and 4 tones")
        if np.unique(idx).size != idx.size:
            raise ValueError("duplicate frequency within one projection")
        if idx.min() < 0 or idx.max() >= self.n_frequencies:
            raise IndexError("frequency index outside the measurement grid")
        self.rows.append(idx)

    def __len__(self):
        return len(self.rows)

    def dense(self) -> np.ndarray:
        out = np.zeros((len(self.rows), self.n_frequencies))
        for i, idx in enumerate(self.rows):
            out[i, idx] = 1.0
        return out

    def apply(self, matrix: np.ndarray) -> np.ndarray:
        """Return ``S @ matrix`` without forming S."""
        out = np.empty((len(self.rows), matrix.shape[1]))
        for i, idx in enumerate(self.rows):
            out[i] = matrix[idx].sum(axis=0)
        return out


def draw_projection(rng: np.random.Generator, n_frequencies: int, tones: int, excluded=()) -> np.ndarray:
    """Pick `tones` distinct grid indices uniformly at random, sorted."""
    if tones < 1:
        raise ValueError("need at least one tone")
    if tones > n_frequencies:
        raise ValueError("more tones than grid points")
    excluded = np.asarray(list(excluded), dtype=np.intp)
    if excluded.size:
        pool = np.setdiff1d(np.arange(n_frequencies), excluded)
        if pool.size < tones:
            raise ValueError("exclusions leave fewer indices than tones")
        return np.sort(rng.choice(pool, size=tones, replace=False))
    return np.sort(rng.choice(n_frequencies, size=tones, replace=False))
