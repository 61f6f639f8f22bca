"""Scenario configuration, Monte-Carlo runs, sweeps, export and the CLI."""

from .config import ConfigError, ScenarioConfig, SweepSpec, load_scenario, load_sweep
from .export import COLUMNS, export_results, read_results
from .runner import derive_seed, run_sample, run_scenario, run_sweep

__all__ = [
    "ConfigError",
    "ScenarioConfig",
    "SweepSpec",
    "load_scenario",
    "load_sweep",
    "COLUMNS",
    "export_results",
    "read_results",
    "derive_seed",
    "run_sample",
    "run_scenario",
    "run_sweep",
]
