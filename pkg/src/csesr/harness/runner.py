"""Monte-Carlo scenario runs and parameter sweeps.

Every random quantity of sample ``s`` in a run with base seed ``b`` is
drawn from a generator seeded with :func:`derive_seed` ``(b, s, stream)``:
stream 0 picks the field direction, stream 1 seeds the backend noise
(shared by the CS and raster trials of that sample), stream 2 draws the
CS projections and stream 3 the noise of an emitted synthetic spectrum.
Samples are therefore independent of one another and of the order in
which they run, so serial and parallel runs agree bit for bit.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial

import numpy as np

from ..acquisition import SimulatedBackend
from ..metrics import MetricsSummary, summarize
from ..protocols.cs import run_cs_trial
from ..protocols.raster import raster_sweep, run_raster_trial, subsample_indices
from ..spectrum import (
    BiasField,
    NVConstants,
    ResonanceSet,
    absorption,
    amplitude_for_depth,
    compute_resonances,
    linear_grid,
    resonance_frequencies,
    synthesize_spectrum,
)
from .config import ConfigError, ScenarioConfig, SweepSpec

log = logging.getLogger(__name__)

FIELD_STREAM = 0
NOISE_STREAM = 1
CS_STREAM = 2
SPECTRUM_STREAM = 3

MAX_FIELD_DRAWS = 10_000


def derive_seed(base_seed: int, sample: int, stream: int) -> int:
    """64-bit seed hashed from ``SeedSequence([base_seed, sample, stream])``."""
    ss = np.random.SeedSequence([int(base_seed), int(sample), int(stream)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def draw_field(rng: np.random.Generator, magnitude: float, min_separation: float,
               consts: NVConstants | None = None) -> tuple[BiasField, int]:
    """Field of fixed magnitude with a direction uniform on the sphere.

    Directions whose 8 resonances come closer than `min_separation` MHz
    are redrawn. Returns the field and the number of rejected draws.
    """
    for rejected in range(MAX_FIELD_DRAWS):
        v = rng.standard_normal(3)
        norm = np.linalg.norm(v)
        if norm < 1e-12:
            continue
        field = BiasField(float(magnitude), v / norm)
        if np.min(np.diff(resonance_frequencies(field, consts))) >= min_separation:
            return field, rejected
    raise ConfigError(
        f"no field direction at {magnitude} G keeps resonances {min_separation} MHz apart "
        f"after {MAX_FIELD_DRAWS} draws"
    )


def sample_truth(config: ScenarioConfig, sample: int) -> tuple[ResonanceSet, int]:
    """Ground-truth resonances of one sample and the number of rejected draws."""
    if config.field_direction is not None:
        field, rejected = BiasField(config.field_gauss, np.asarray(config.field_direction)), 0
    else:
        rng = np.random.default_rng(derive_seed(config.seed, sample, FIELD_STREAM))
        field, rejected = draw_field(rng, config.field_gauss, 2.0 * config.linewidth)
        if rejected:
            log.info("sample %d: rejected %d field directions with colliding resonances", sample, rejected)
    amp = amplitude_for_depth(config.contrast, config.linewidth)
    res = compute_resonances(field, window=config.window, width=config.linewidth, amplitude=amp)
    return res, rejected


def measurement_grid(config: ScenarioConfig) -> np.ndarray:
    return linear_grid(config.window, config.grid_points)


def noise_sigma(config: ScenarioConfig, res: ResonanceSet, grid) -> float:
    """Noise level giving the configured SNR for the deepest clean dip."""
    if np.isinf(config.snr):
        return 0.0
    return float(np.max(absorption(grid, res))) / config.snr


def synthetic_spectrum(config: ScenarioConfig, sample: int = 0):
    """One noisy raster spectrum on the full grid, with its ground truth."""
    res, _ = sample_truth(config, sample)
    grid = measurement_grid(config)
    spec = synthesize_spectrum(res, grid, config.reference_power, config.snr,
                               derive_seed(config.seed, sample, SPECTRUM_STREAM))
    return spec, res


@dataclass(frozen=True)
class TrialRecord:
    """Result of one method on one sample at one measurement count."""

    sample: int
    method: str
    n_points: int
    success: bool
    delta_nu: float | None
    measurements_used: int
    terminated_by: str


@dataclass(frozen=True)
class SampleResult:
    sample: int
    truth: tuple
    rejected_fields: int
    records: tuple


def run_sample(config: ScenarioConfig, sample: int) -> SampleResult:
    """Run the configured methods on one ground-truth spectrum."""
    res, rejected = sample_truth(config, sample)
    grid = measurement_grid(config)
    sigma = noise_sigma(config, res, grid)
    noise_seed = derive_seed(config.seed, sample, NOISE_STREAM)
    records = []

    if config.method in ("cs", "both"):
        backend = SimulatedBackend(res, config.window, config.reference_power, sigma, noise_seed)
        rng = np.random.default_rng(derive_seed(config.seed, sample, CS_STREAM))
        out = run_cs_trial(backend, grid, config.cs_config(), rng, truth=res)
        for cp in out.checkpoints:
            ok = cp.per_peak_abs_error is not None
            records.append(TrialRecord(sample, "cs", cp.n_measurements, ok, cp.delta_nu,
                                       cp.n_measurements, out.terminated_by))

    if config.method in ("raster", "both"):
        backend = SimulatedBackend(res, config.window, config.reference_power, sigma, noise_seed)
        # one full sweep; every sub-sampled scan reads its points from it
        freqs, counts = raster_sweep(backend, grid, config.grid_points)
        for n in config.points:
            idx = subsample_indices(config.grid_points, n)
            out = run_raster_trial(backend, grid, n, config.linewidth, truth=res,
                                   sweep=(freqs[idx], counts[idx]))
            records.append(TrialRecord(sample, "raster", n, out.success, out.delta_nu,
                                       out.measurements_used, out.terminated_by))

    return SampleResult(sample, tuple(float(c) for c in res.centers), rejected, tuple(records))


@dataclass(frozen=True)
class Row:
    """One aggregated table row; `summary` is None when the row failed."""

    axis_value: object
    method: str
    n_points: int
    summary: MetricsSummary | None
    seed: int
    error: str | None = None


@dataclass
class ScenarioResult:
    config: ScenarioConfig
    samples: list
    summaries: dict

    def rows(self, axis_value=None) -> list:
        out = []
        for (method, n), summ in self.summaries.items():
            av = n if axis_value is None else axis_value
            out.append(Row(av, method, n, summ, self.config.seed))
        return out


def _methods(config: ScenarioConfig):
    return ("cs", "raster") if config.method == "both" else (config.method,)


def run_scenario(config: ScenarioConfig, workers: int = 1) -> ScenarioResult:
    """All samples of a scenario, aggregated per method and measurement count.

    With ``workers > 1`` samples run in a process pool; results are merged
    by sample index, so the output does not depend on `workers`.
    """
    config.validate()
    task = partial(run_sample, config)
    indices = range(config.n_samples)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            samples = list(pool.map(task, indices))
    else:
        samples = [task(i) for i in indices]
    samples.sort(key=lambda s: s.sample)

    summaries = {}
    for method in _methods(config):
        for n in config.points:
            recs = [r for s in samples for r in s.records if r.method == method and r.n_points == n]
            if recs:
                summaries[(method, n)] = summarize(recs)
    return ScenarioResult(config, samples, summaries)


@dataclass
class SweepResult:
    spec: SweepSpec
    rows: list
    scenarios: dict

    @property
    def errors(self) -> list:
        return [{"axis_value": r.axis_value, "method": r.method, "error": r.error} for r in self.rows if r.error]


def run_sweep(spec: SweepSpec, workers: int = 1) -> SweepResult:
    """Run the base scenario at every value of the swept axis.

    A value whose scenario fails is recorded as error rows and the sweep
    moves on.
    """
    rows, scenarios = [], {}
    for value in spec.values:
        config = spec.scenario(value)
        try:
            result = run_scenario(config, workers)
        except Exception as exc:  # recorded per row; the sweep continues
            log.error("sweep %s=%s failed: %s", spec.axis, value, exc)
            msg = f"{type(exc).__name__}: {exc}"
            for method in _methods(config):
                for n in config.points:
                    rows.append(Row(value, method, n, None, config.seed, msg))
            continue
        scenarios[value] = result
        rows.extend(result.rows(axis_value=value))
    return SweepResult(spec, rows, scenarios)
