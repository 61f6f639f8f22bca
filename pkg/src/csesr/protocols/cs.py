"""Adaptive compressed-sensing acquisition loop."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..acquisition import measure_projection, run_initial_phase
from ..dictionary import build_dictionary, candidate_grid, draw_projection, refine_dictionary
from ..metrics import match_peaks
from ..solver import TVProblem, default_lambda, reconstruct
from .fitting import fit_peaks
from .peaks import N_RESONANCES, ConvergenceState, PeakList, detect_peaks

CONVERGED = "converged"
MAX_MEASUREMENTS = "max_measurements"


@dataclass
class CSConfig:
    tones: int = 3
    n_initial: int = 10
    max_measurements: int = 650
    linewidth: float = 10.0
    candidate_spacing: float = 1.0
    lambda_scale: float = 0.03
    threshold_fraction: float = 0.15
    min_mass_fraction: float = 0.3
    tolerance: float = 2.0
    required_consecutive: int = 4
    width_tolerance: float = 0.5
    refine_factor: int = 4
    refine_span: float = 2.0
    reference_every: int = 1
    reference_mode: str = "mean"
    solver_tol: float = 1e-6
    solver_max_iter: int = 5000
    checkpoints: tuple = ()
    extend: bool = False
    final_fit: bool = True

    def __post_init__(self):
        if not 1 <= self.tones <= 4:
            raise ValueError("tones must be between 1 and 4")
        if self.n_initial < 4:
            raise ValueError("n_initial must be at least 4")
        if self.max_measurements < self.n_initial:
            raise ValueError("max_measurements must cover the initial phase")
        if self.reference_every < 1:
            raise ValueError("reference_every must be >= 1")
        if self.reference_mode not in ("mean", "paired"):
            raise ValueError("reference_mode must be 'mean' or 'paired'")


@dataclass
class Checkpoint:
    n_measurements: int
    peaks: PeakList
    per_peak_abs_error: np.ndarray | None

    @property
    def success(self) -> bool:
        return self.peaks.found_count == N_RESONANCES

    @property
    def delta_nu(self) -> float | None:
        if self.per_peak_abs_error is None:
            return None
        return float(np.mean(self.per_peak_abs_error))


@dataclass
class TrialOutcome:
    success: bool
    estimated_peaks: PeakList
    measurements_used: int
    per_peak_abs_error: np.ndarray | None
    delta_nu: float | None
    terminated_by: str
    checkpoints: list = field(default_factory=list)
    message: str = ""


def make_outcome(peaks: PeakList, n: int, terminated_by: str, truth=None, checkpoints=()) -> TrialOutcome:
    success = peaks.found_count == N_RESONANCES
    err = match_peaks(peaks, truth) if (truth is not None and success) else None
    dnu = float(np.mean(err)) if err is not None else None
    return TrialOutcome(success, peaks, n, err, dnu, terminated_by, list(checkpoints))


class _Accumulator:
    """Growing system matrix ``S L`` and dip vector for one trial."""

    def __init__(self, capacity: int, dictionary):
        self.capacity = capacity
        self.rows: list = []
        self.y = np.empty(capacity)
        self.signal = np.empty(capacity)
        self.set_dictionary(dictionary)

    def set_dictionary(self, dictionary):
        self.dictionary = dictionary
        n = dictionary.n_candidates
        self.A = np.empty((self.capacity, n))
        for i, idx in enumerate(self.rows):
            self.A[i] = dictionary.matrix[list(idx)].sum(axis=0)
        self._v = np.ones(n) / np.sqrt(n)
        self._norm_sq = 0.0
        self.a = np.zeros(n)

    def add(self, grid_indices, dip: float, signal: float = np.nan):
        i = len(self.rows)
        self.rows.append(tuple(grid_indices))
        self.A[i] = self.dictionary.matrix[list(grid_indices)].sum(axis=0)
        self.y[i] = dip
        self.signal[i] = signal

    def rebase(self, reference_mean: float):
        """Recompute every dip against a new mean reference level."""
        n = len(self.rows)
        self.y[:n] = reference_mean - self.signal[:n]

    def lipschitz(self) -> float:
        # warm-started power iteration; ||A|| can only grow as rows are added
        A = self.A[: len(self.rows)]
        v = self._v
        est = 0.0
        for _ in range(2):
            w = A.T @ (A @ v)
            est = float(np.linalg.norm(w))
            if est == 0.0:
                break
            v = w / est
        self._v = v
        self._norm_sq = max(self._norm_sq, est)
        return 2.0 * 1.05 * self._norm_sq

    def solve(self, lam: float, tol: float, max_iter: int):
        n = len(self.rows)
        prob = TVProblem(None, None, self.y[:n], lam, system=self.A[:n])
        rep = reconstruct(prob, self.a, tol=tol, max_iter=max_iter, lipschitz=self.lipschitz())
        self.a = rep.a_hat
        return rep


def _fit_projections(grid, acc, peaks: PeakList, config: CSConfig):
    n = len(acc.rows)
    tones = [grid[list(idx)] for idx in acc.rows]
    init = PeakList(peaks.centers, np.full(peaks.found_count, config.linewidth), peaks.amplitudes)
    window = (float(grid[0]), float(grid[-1]))
    return fit_peaks(tones, acc.y[:n], init, window, sign=1.0, offset=0.0)


def refit_projections(grid, acc, peaks: PeakList, config: CSConfig) -> PeakList:
    """Least-squares refinement of 8 reconstructed peaks on the raw projections.

    Falls back to the reconstruction's own estimate if the fit fails.
    """
    if not config.final_fit or peaks.found_count != N_RESONANCES:
        return peaks
    fit = _fit_projections(grid, acc, peaks, config)
    return fit.peaks if fit.success else peaks


def _widths_ok(peaks: PeakList, config: CSConfig) -> bool:
    band = config.width_tolerance * config.linewidth
    return bool(np.all(np.abs(peaks.widths - config.linewidth) <= band))


def _fitted_or_none(grid, acc, peaks: PeakList, config: CSConfig):
    fit = _fit_projections(grid, acc, peaks, config)
    return fit.peaks if fit.success else None


def run_cs_trial(backend, grid, config: CSConfig, rng: np.random.Generator, truth=None) -> TrialOutcome:
    """Adaptive CS measurement loop on `backend` over measurement grid `grid`.

    After a random initial phase, each iteration measures one random
    multi-tone projection, re-solves the TV program and extracts peaks.
    When `required_consecutive` reconstructions in a row agree on all 8
    peaks, the dictionary is refined around them and the data re-solved;
    the trial stops once the refined solution still agrees and its widths
    are within `width_tolerance` of the configured linewidth, or when
    `max_measurements` projections have been taken.

    With ``config.extend`` the trial keeps measuring up to
    `max_measurements` after the stop rule fires, with the dictionary
    frozen, so estimates can be read at every count in
    ``config.checkpoints``. The returned outcome still reports the point
    where the stop rule fired.

    A reference count is taken with every `reference_every`-th projection.
    With ``reference_mode="mean"`` all dips are measured against the
    running mean of the references, re-evaluated before each solve; with
    ``"paired"`` each projection uses its own reference when it has one,
    which doubles the noise variance of the dips.
    """
    grid = np.asarray(grid, dtype=float)
    window = (float(grid[0]), float(grid[-1]))
    base = build_dictionary(grid, candidate_grid(window, config.candidate_spacing), config.linewidth)
    acc = _Accumulator(config.max_measurements, base)
    state = ConvergenceState(config.tolerance, config.required_consecutive)
    checkpoints_wanted = sorted(set(int(c) for c in config.checkpoints if c <= config.max_measurements))
    trace = []

    baseline = run_initial_phase(backend, grid, config.n_initial, config.tones, rng)
    refs = list(baseline.references)

    paired = config.reference_mode == "paired"

    def dip_of(rec):
        ref = rec.reference_count
        return (ref if paired and ref is not None else np.mean(refs)) - rec.signal_count

    for rec in baseline.records:
        acc.add(rec.grid_indices, dip_of(rec), rec.signal_count)

    def solve_and_detect():
        if not paired:
            acc.rebase(float(np.mean(refs)))
        sigma = float(np.std(refs, ddof=1)) if len(refs) > 1 else 0.0
        lam = default_lambda(sigma, len(acc.rows), config.lambda_scale)
        acc.solve(lam, config.solver_tol, config.solver_max_iter)
        return detect_peaks(acc.a, acc.dictionary, config.threshold_fraction,
                            min_mass_fraction=config.min_mass_fraction)

    def record(n, peaks):
        peaks = refit_projections(grid, acc, peaks, config)
        err = match_peaks(peaks, truth) if (truth is not None) else None
        trace.append(Checkpoint(n, peaks, err))

    peaks = solve_and_detect()
    state.update(peaks)
    n = len(acc.rows)
    if n in checkpoints_wanted:
        record(n, peaks)

    refined = False
    stopped = None  # (n, peaks) when the stop rule fired
    while n < config.max_measurements:
        idx = draw_projection(rng, grid.size, config.tones)
        with_ref = n % config.reference_every == 0
        rec = measure_projection(backend, grid, idx, n, with_reference=with_ref)
        if with_ref:
            refs.append(rec.reference_count)
        acc.add(rec.grid_indices, dip_of(rec), rec.signal_count)
        n = len(acc.rows)

        if stopped is not None:
            # extension phase: dictionary frozen, solve only where reported
            if n in checkpoints_wanted:
                record(n, solve_and_detect())
            continue

        peaks = solve_and_detect()
        if not state.update(peaks):
            if refined:
                # the convergence event that justified refinement is gone
                acc.set_dictionary(base)
                refined = False
        elif not refined:
            # refine around the fitted line positions and widths when the fit holds
            fitted = _fitted_or_none(grid, acc, peaks, config)
            acc.set_dictionary(refine_dictionary(base, fitted if fitted is not None else peaks,
                                                 factor=config.refine_factor, span=config.refine_span))
            refined = True
            peaks = solve_and_detect()
            state.update(peaks)
        if refined and state.converged:
            fitted = _fitted_or_none(grid, acc, peaks, config)
            if fitted is not None and _widths_ok(fitted, config):
                stopped = (n, peaks)
        if n in checkpoints_wanted:
            record(n, peaks)
        if stopped is not None and not config.extend:
            break

    if stopped is not None:
        n_stop, final = stopped
        if not any(cp.n_measurements == n_stop for cp in trace) or not config.extend:
            final = refit_projections(grid, _prefix(acc, n_stop), final, config)
        else:
            final = next(cp.peaks for cp in trace if cp.n_measurements == n_stop)
        return make_outcome(final, n_stop, CONVERGED, truth, trace)
    return make_outcome(refit_projections(grid, acc, peaks, config), n, MAX_MEASUREMENTS, truth, trace)


class _Prefix:
    def __init__(self, acc, n):
        self.rows = acc.rows[:n]
        self.y = acc.y[:n]


def _prefix(acc, n):
    return _Prefix(acc, n)
