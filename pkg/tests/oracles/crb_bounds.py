"""Cramer-Rao bounds on the peak-center error of CS and raster scans.

Independent of the solver: for each simulated truth this evaluates the
Fisher information of the 8-Lorentzian model under the measurement design
(random multi-tone projections, or a linearly spaced single-tone sweep)
and reports the mean over peaks of sqrt(2/pi) * sqrt(CRB), the expected
absolute error of an efficient unbiased estimator. It is the floor for
mean_delta_nu at P = 1.

Run: python3 tests/oracles/crb_bounds.py
"""

import numpy as np

from csesr.dictionary import draw_projection
from csesr.harness.config import load_scenario, load_sweep
from csesr.harness.runner import measurement_grid, noise_sigma, sample_truth
from csesr.protocols.fitting import _model_and_jac, _tone_array


def mean_abs_bound(params, tones, sigma, free_offset):
    f, m = _tone_array(tones)
    _, jac = _model_and_jac(params, f, m, 8, 1.0)
    if not free_offset:
        jac = jac[:, :-1]
    cov = np.linalg.inv(jac.T @ jac / sigma**2)
    return float(np.sqrt(2 / np.pi) * np.mean(np.sqrt(np.diag(cov)[:8])))


def bounds(config, n, n_samples=20, seed=0):
    rng = np.random.default_rng(seed)
    grid = measurement_grid(config)
    cs, raster = [], []
    for s in range(n_samples):
        res, _ = sample_truth(config, s)
        sigma = noise_sigma(config, res, grid)
        p = np.r_[res.centers, res.widths, res.amplitudes, 0.0]
        proj = [grid[draw_projection(rng, grid.size, config.tones)] for _ in range(n)]
        cs.append(mean_abs_bound(p, proj, sigma, free_offset=False))
        idx = np.unique(np.round(np.linspace(0, grid.size - 1, n)).astype(int))
        raster.append(mean_abs_bound(p, [[g] for g in grid[idx]], sigma, free_offset=True))
    return float(np.mean(cs)), float(np.mean(raster))


if __name__ == "__main__":
    hf = load_scenario(preset="high-field")
    for n in (100, 150, 217, 650):
        print("high-field n=%d  cs %.3f  raster %.3f" % ((n,) + bounds(hf, n)))
    fig3 = load_sweep(preset="fig3")
    for v in fig3.values:
        print("fig3 snr=%s  cs %.3f  raster %.3f" % ((v,) + bounds(fig3.scenario(v), 217)))
    fig5 = load_sweep(preset="fig5")
    for v in fig5.values:
        print("fig5 tones=%s  cs %.3f  raster %.3f" % ((v,) + bounds(fig5.scenario(v), 150)))
