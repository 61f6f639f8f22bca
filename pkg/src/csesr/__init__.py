"""Compressed-sensing acquisition of NV-center ESR spectra.

Modules
-------
spectrum
    Zeeman resonance model and synthetic fluorescence spectra.
dictionary
    Overcomplete Lorentzian dictionaries and multi-tone sampling matrices.
solver
    Nonnegative TV-regularized recovery and an exhaustive test oracle.
acquisition
    Measurement backends and the initial baseline phase.
protocols
    The adaptive CS loop, the raster baseline, and peak fitting.
metrics
    Peak errors, success probability and normalized error.
harness
    Scenario configuration, Monte-Carlo runs, sweeps, export and CLI.
"""

from .spectrum import (
    BiasField,
    NVConstants,
    ResonanceSet,
    SpectrumSample,
    WindowError,
    compute_resonances,
    lorentzian,
    synthesize_spectrum,
)
from .dictionary import Dictionary, SamplingMatrix, build_dictionary, refine_dictionary
from .solver import TVProblem, SolverReport, oracle_minimize, reconstruct
from .acquisition import ProjectionRecord, SimulatedBackend, run_initial_phase
from .metrics import MetricsSummary, match_peaks, normalized_error, summarize

__version__ = "0.1.0"

__all__ = [
    "BiasField",
    "NVConstants",
    "ResonanceSet",
    "SpectrumSample",
    "WindowError",
    "compute_resonances",
    "lorentzian",
    "synthesize_spectrum",
    "Dictionary",
    "SamplingMatrix",
    "build_dictionary",
    "refine_dictionary",
    "TVProblem",
    "SolverReport",
    "oracle_minimize",
    "reconstruct",
    "ProjectionRecord",
    "SimulatedBackend",
    "run_initial_phase",
    "MetricsSummary",
    "match_peaks",
    "normalized_error",
    "summarize",
]
