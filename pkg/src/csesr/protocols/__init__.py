"""Acquisition protocols: the adaptive CS loop and the raster baseline."""

from .peaks import N_RESONANCES, ConvergenceState, PeakList, detect_peaks, max_deviation
from .fitting import FitResult, fit_lorentzians, fit_peaks
from .cs import CSConfig, Checkpoint, TrialOutcome, run_cs_trial
from .raster import raster_sweep, run_raster_trial, subsample_indices

__all__ = [
    "N_RESONANCES",
    "ConvergenceState",
    "PeakList",
    "detect_peaks",
    "max_deviation",
    "FitResult",
    "fit_lorentzians",
    "fit_peaks",
    "CSConfig",
    "Checkpoint",
    "TrialOutcome",
    "run_cs_trial",
    "raster_sweep",
    "run_raster_trial",
    "subsample_indices",
]
