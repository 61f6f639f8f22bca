"""Figures of merit: peak errors, success probability, normalized error."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .spectrum import DEFAULT_GAMMA

N_RESONANCES = 8


@dataclass(frozen=True)
class MetricsSummary:
    n_trials: int
    n_success: int
    success_probability: float
    mean_delta_nu: float | None
    std_delta_nu: float | None
    normalized_error: float | None
    sensitivity_eta: float | None
    mean_measurements: float

    def as_dict(self) -> dict:
        return {
            "n_trials": self.n_trials,
            "n_success": self.n_success,
            "P": self.success_probability,
            "mean_delta_nu": self.mean_delta_nu,
            "std_delta_nu": self.std_delta_nu,
            "normalized_error": self.normalized_error,
            "sensitivity_eta": self.sensitivity_eta,
            "mean_measurements": self.mean_measurements,
        }


def normalized_error(delta_nu: float, success_probability: float) -> float | None:
    """Mean peak error folded with the success probability, ``dnu / sqrt(P)``."""
    if success_probability <= 0:
        return None
    return delta_nu / math.sqrt(success_probability)


def sensitivity(delta_nu: float, total_time: float, gamma: float = DEFAULT_GAMMA) -> float:
    """Field sensitivity ``dnu * sqrt(T) / gamma`` in Gauss * sqrt(time unit)."""
    return delta_nu * math.sqrt(total_time) / gamma


def match_peaks(estimated, truth, n_expected: int = N_RESONANCES) -> np.ndarray | None:
    """Absolute center errors pairing both sorted lists in order.

    Returns None unless both sides hold exactly `n_expected` peaks.
    """
    est = np.sort(np.asarray(estimated.centers, dtype=float))
    tru = np.sort(np.asarray(truth.centers, dtype=float))
    if est.size != n_expected or tru.size != n_expected:
        return None
    return np.abs(est - tru)


def best_assignment_error(estimated, truth) -> float:
    """Smallest total absolute error over every pairing; exhaustive, for tests."""
    est = np.asarray(estimated.centers, dtype=float)
    tru = np.asarray(truth.centers, dtype=float)
    best = np.inf
    for perm in itertools.permutations(range(est.size)):
        best = min(best, float(np.abs(est[list(perm)] - tru).sum()))
    return best


def summarize(outcomes, gamma: float = DEFAULT_GAMMA) -> MetricsSummary:
    """Aggregate trial outcomes.

    Error statistics use successful trials only; failures enter through the
    success probability. Sensitivity uses the mean measurement count of the
    successful trials as the total time.
    """
    outcomes = list(outcomes)
    n = len(outcomes)
    if n < 1:
        raise ValueError("need at least one outcome")
    wins = [o for o in outcomes if o.success]
    p = len(wins) / n
    mean_meas = float(np.mean(np.sort([o.measurements_used for o in outcomes])))
    if not wins:
        return MetricsSummary(n, 0, p, None, None, None, None, mean_meas)
    # sort first: the float sum must not depend on trial order
    dnu = np.sort(np.array([o.delta_nu for o in wins], dtype=float))
    mean = float(np.mean(dnu))
    std = float(np.std(dnu))
    t = float(np.mean(np.sort([o.measurements_used for o in wins])))
    return MetricsSummary(
        n,
        len(wins),
        p,
        mean,
        std,
        normalized_error(mean, p),
        sensitivity(mean, t, gamma),
        mean_meas,
    )
