"""Multi-Lorentzian least-squares fits for raster sweeps and projection data."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import gaussian_filter1d
from scipy.optimize import least_squares
from scipy.signal import find_peaks

from .peaks import PeakList

_FWHM_PER_SIGMA = 2.0 * np.sqrt(2.0 * np.log(2.0))
SMOOTH_FWHM = 1.0  # smoothing kernel FWHM in units of the linewidth


@dataclass
class FitResult:
    peaks: PeakList
    success: bool
    message: str
    offset: float = 0.0
    cost: float = np.nan


def _tone_array(tones):
    """Pad ragged per-row tone lists into (rows, T) frequencies and a mask."""
    tones = [np.atleast_1d(np.asarray(t, dtype=float)) for t in tones]
    width = max(t.size for t in tones)
    freqs = np.zeros((len(tones), width))
    mask = np.zeros((len(tones), width))
    for i, t in enumerate(tones):
        freqs[i, : t.size] = t
        mask[i, : t.size] = 1.0
    return freqs, mask


def _model_and_jac(params, freqs, mask, n_peaks, sign):
    c = params[:n_peaks]
    w = params[n_peaks : 2 * n_peaks]
    a = params[2 * n_peaks : 3 * n_peaks]
    off = params[-1]
    u = 2.0 * (freqs[:, :, None] - c) / w  # rows x tones x peaks
    q = 1.0 + u * u
    lor = (2.0 / (np.pi * w)) / q * mask[:, :, None]
    model = off + sign * np.einsum("rtk,k->r", lor, a)
    d_c = sign * np.einsum("rtk,k->rk", lor * (4.0 * u / (w * q)), a)
    d_w = sign * np.einsum("rtk,k->rk", lor * ((u * u - 1.0) / (w * q)), a)
    d_a = sign * lor.sum(axis=1)
    jac = np.hstack([d_c, d_w, d_a, np.ones((freqs.shape[0], 1))])
    return model, jac


def fit_peaks(tones, data, init: PeakList, window, *, sign=-1.0, offset=None, width_range=(0.2, 5.0),
              min_separation=0.5, min_relative_depth=0.25) -> FitResult:
    """Least-squares fit of ``offset + sign * sum_tones sum_k L_k(f) a_k``.

    `tones` holds the frequencies applied in each row (one per row for a
    raster sweep, several for CS projections). The fit uses a bounded
    trust-region solver with analytic Jacobian; it is declared failed when
    the solver fails, a center sits on the window edge, a width hits its
    bound, two peaks come closer than `min_separation` times their mean
    width, or a peak's depth is below `min_relative_depth` of the median
    depth.
    """
    freqs, mask = _tone_array(tones)
    data = np.asarray(data, dtype=float)
    k = init.found_count
    if k == 0:
        return FitResult(init, False, "no initial peaks")
    if data.size < 3 * k + 1:
        return FitResult(init, False, "fewer data points than parameters")
    lo, hi = window
    w0 = init.widths
    a0 = init.amplitudes if init.amplitudes is not None else np.ones(k)
    a0 = np.maximum(a0, 1e-6)
    off0 = float(np.median(data)) if offset is None else float(offset)
    x0 = np.concatenate([init.centers, w0, a0, [off0]])
    wmin, wmax = width_range[0] * w0, width_range[1] * w0
    lower = np.concatenate([np.full(k, lo), wmin, np.zeros(k), [-np.inf]])
    upper = np.concatenate([np.full(k, hi), wmax, np.full(k, np.inf), [np.inf]])
    pad = 1e-9 * np.where(np.isfinite(upper - lower), upper - lower, 0.0)
    x0 = np.clip(x0, lower + pad, upper - pad)

    def fun(p):
        return _model_and_jac(p, freqs, mask, k, sign)[0] - data

    def jac(p):
        return _model_and_jac(p, freqs, mask, k, sign)[1]

    try:
        sol = least_squares(fun, x0, jac=jac, bounds=(lower, upper), method="trf", x_scale="jac", max_nfev=1000)
    except (ValueError, np.linalg.LinAlgError) as exc:
        return FitResult(init, False, f"fit error: {exc}")
    p = sol.x
    c, w, a = p[:k], p[k : 2 * k], p[2 * k : 3 * k]
    peaks = PeakList(c, w, a)
    if sol.status <= 0:
        return FitResult(peaks, False, sol.message, p[-1], sol.cost)
    span = hi - lo
    if np.any(c <= lo + 1e-6 * span) or np.any(c >= hi - 1e-6 * span):
        return FitResult(peaks, False, "center on window edge", p[-1], sol.cost)
    if np.any(w <= wmin * (1 + 1e-6)) or np.any(w >= wmax * (1 - 1e-6)):
        return FitResult(peaks, False, "width at bound", p[-1], sol.cost)
    order = np.argsort(c)
    cs, ws = c[order], w[order]
    if k > 1 and np.any(np.diff(cs) < min_separation * 0.5 * (ws[1:] + ws[:-1])):
        return FitResult(peaks, False, "unresolved peaks", p[-1], sol.cost)
    depth = 2.0 * a / (np.pi * w)
    if np.any(depth < min_relative_depth * np.median(depth)):
        return FitResult(peaks, False, "insignificant peak", p[-1], sol.cost)
    return FitResult(peaks, True, "ok", p[-1], sol.cost)


def initial_guess(grid, counts, n_peaks: int, linewidth: float) -> PeakList | None:
    """The `n_peaks` deepest local minima of the smoothed sweep.

    Smoothing is Gaussian with a FWHM of one linewidth. Returns None
    when fewer than `n_peaks` minima exist.
    """
    grid = np.asarray(grid, dtype=float)
    counts = np.asarray(counts, dtype=float)
    step = float(np.median(np.diff(grid))) if grid.size > 1 else 1.0
    sigma_pts = SMOOTH_FWHM * linewidth / _FWHM_PER_SIGMA / step
    smooth = gaussian_filter1d(counts, sigma_pts, mode="nearest") if sigma_pts > 0.3 else counts
    base = float(np.median(smooth))
    distance = max(1, int(np.floor(linewidth / step)))
    idx, _ = find_peaks(-smooth, distance=distance)
    if idx.size < n_peaks:
        return None
    idx = idx[np.argsort(smooth[idx])[:n_peaks]]
    depth = np.maximum(base - smooth[idx], 1e-9)
    return PeakList(grid[idx], np.full(n_peaks, float(linewidth)), depth * np.pi * linewidth / 2.0)


def fit_lorentzians(grid, counts, n_peaks: int, init: PeakList | None = None, *, linewidth: float = 10.0,
                    window=None) -> FitResult:
    """Fit ``baseline - sum of n_peaks Lorentzians`` to a single-tone sweep."""
    grid = np.asarray(grid, dtype=float)
    if grid.size < 3 * n_peaks:
        raise ValueError(f"need at least {3 * n_peaks} points for {n_peaks} peaks")
    if init is None:
        init = initial_guess(grid, counts, n_peaks, linewidth)
        if init is None:
            return FitResult(PeakList(), False, "too few local minima")
    window = (float(grid[0]), float(grid[-1])) if window is None else window
    return fit_peaks(grid[:, None], counts, init, window, sign=-1.0)
