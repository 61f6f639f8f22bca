"""Scenario and sweep configuration, YAML loading and presets.

A config file is a YAML mapping. Scenario keys sit at the top level; a
sweep file adds a ``sweep`` section::

    field_gauss: 100          # bias field magnitude (G)
    field_direction: null     # fixed unit vector, or null for random angles
    window: [2545, 3195]      # frequency window (MHz)
    grid_points: 650          # raster grid size; default: one point per MHz
    linewidth: 15             # resonance FWHM (MHz)
    snr: 3                    # deepest clean dip / noise sigma (.inf allowed)
    contrast: 30              # dip depth of an isolated resonance (counts)
    reference_power: 1000     # off-resonance count level
    tones: 3                  # simultaneous tones per CS projection, 1..4
    n_samples: 57             # ground-truth spectra
    max_measurements: 650     # CS projection cap
    seed: 0
    method: both              # cs, raster or both
    points: [50, 100, 650]    # measurement counts reported
    cs:                       # optional CSConfig overrides
      lambda_scale: 0.03
    sweep:
      axis: snr               # n_points, snr, width or tones
      values: [1, 3, 5, 10, 20]
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np
import yaml

from ..protocols.cs import CSConfig
from ..spectrum import DEFAULT_D, DEFAULT_GAMMA

METHODS = ("cs", "raster", "both")
AXES = ("n_points", "snr", "width", "tones")
PRESETS = ("high-field", "low-field", "fig3", "fig4", "fig5")

# CSConfig fields a scenario owns; they cannot be overridden under `cs:`
_SCENARIO_OWNED = {"tones", "max_measurements", "linewidth", "checkpoints", "extend"}


class ConfigError(ValueError):
    """Invalid scenario or sweep configuration."""


@dataclass(frozen=True)
class ScenarioConfig:
    field_gauss: float
    window: tuple
    linewidth: float
    snr: float
    tones: int = 3
    n_samples: int = 57
    max_measurements: int = 650
    seed: int = 0
    method: str = "both"
    points: tuple = (100,)
    grid_points: int | None = None
    contrast: float = 30.0
    reference_power: float = 1000.0
    field_direction: tuple | None = None
    cs: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "window", tuple(float(v) for v in self.window))
        object.__setattr__(self, "points", tuple(int(p) for p in self.points))
        if self.grid_points is None:
            object.__setattr__(self, "grid_points", int(round(self.window[1] - self.window[0])))
        if self.field_direction is not None:
            object.__setattr__(self, "field_direction", tuple(float(v) for v in self.field_direction))
        object.__setattr__(self, "cs", dict(self.cs))
        self.validate()

    def validate(self):
        lo, hi = self.window
        if not hi > lo:
            raise ConfigError(f"window must be increasing, got {self.window}")
        if self.field_gauss < 0:
            raise ConfigError("field_gauss must be nonnegative")
        if not self.linewidth > 0:
            raise ConfigError("linewidth must be positive")
        if not self.snr > 0:
            raise ConfigError("snr must be positive")
        if not 1 <= self.tones <= 4:
            raise ConfigError("tones must be between 1 and 4")
        if self.n_samples < 1:
            raise ConfigError("n_samples must be at least 1")
        if self.method not in METHODS:
            raise ConfigError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.contrast <= 0 or self.reference_power <= 0:
            raise ConfigError("contrast and reference_power must be positive")
        if self.grid_points < 8:
            raise ConfigError("grid_points must be at least 8")
        if not self.points:
            raise ConfigError("points must be nonempty")
        if any(p < 1 for p in self.points) or list(self.points) != sorted(set(self.points)):
            raise ConfigError("points must be positive and strictly increasing")
        if self.method in ("raster", "both") and self.points[-1] > self.grid_points:
            raise ConfigError(f"raster point count {self.points[-1]} exceeds grid_points {self.grid_points}")
        if self.method in ("cs", "both") and self.points[-1] > self.max_measurements:
            raise ConfigError(f"CS point count {self.points[-1]} exceeds max_measurements {self.max_measurements}")
        # every field direction must keep all resonances inside the window
        shift = DEFAULT_GAMMA * self.field_gauss
        if DEFAULT_D - shift < lo or DEFAULT_D + shift > hi:
            raise ConfigError(
                f"resonances may span {DEFAULT_D - shift:.1f}..{DEFAULT_D + shift:.1f} MHz, "
                f"outside window {lo:.1f}..{hi:.1f} MHz"
            )
        bad = set(self.cs) - {f.name for f in dataclasses.fields(CSConfig)}
        if bad:
            raise ConfigError(f"unknown cs options: {sorted(bad)}")
        owned = set(self.cs) & _SCENARIO_OWNED
        if owned:
            raise ConfigError(f"cs options {sorted(owned)} are set by the scenario itself")
        try:
            cs = self.cs_config()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if self.method in ("cs", "both") and self.points[0] < cs.n_initial:
            raise ConfigError(f"CS point counts start after the {cs.n_initial} initial projections")

    def cs_config(self) -> CSConfig:
        return CSConfig(
            tones=self.tones,
            max_measurements=self.max_measurements,
            linewidth=self.linewidth,
            checkpoints=self.points,
            extend=True,
            **self.cs,
        )

    def replace(self, **changes) -> "ScenarioConfig":
        try:
            return dataclasses.replace(self, **changes)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["window"] = list(self.window)
        d["points"] = list(self.points)
        if self.field_direction is not None:
            d["field_direction"] = list(self.field_direction)
        return d


@dataclass(frozen=True)
class SweepSpec:
    axis: str
    values: tuple
    base: ScenarioConfig

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(self.values))
        if self.axis not in AXES:
            raise ConfigError(f"sweep axis must be one of {AXES}, got {self.axis!r}")
        if not self.values:
            raise ConfigError("sweep values must be nonempty")
        d = np.diff(np.asarray(self.values, dtype=float))
        if not (np.all(d > 0) or np.all(d < 0)):
            raise ConfigError("sweep values must be strictly monotone")
        for v in self.values:
            self.scenario(v)

    def scenario(self, value) -> ScenarioConfig:
        """The base scenario with the swept parameter set to `value`."""
        if self.axis == "n_points":
            return self.base.replace(points=(int(value),))
        if self.axis == "snr":
            return self.base.replace(snr=float(value))
        if self.axis == "width":
            return self.base.replace(linewidth=float(value))
        return self.base.replace(tones=int(value))

    def to_dict(self) -> dict:
        return {"axis": self.axis, "values": list(self.values), "base": self.base.to_dict()}


def scenario_from_dict(data: dict) -> ScenarioConfig:
    data = {k: v for k, v in data.items() if k != "sweep"}
    names = {f.name for f in dataclasses.fields(ScenarioConfig)}
    unknown = set(data) - names
    if unknown:
        raise ConfigError(f"unknown scenario keys: {sorted(unknown)}")
    try:
        return ScenarioConfig(**data)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def sweep_from_dict(data: dict) -> SweepSpec:
    sweep = data.get("sweep")
    if not isinstance(sweep, dict):
        raise ConfigError("a sweep config needs a 'sweep' mapping with axis and values")
    unknown = set(sweep) - {"axis", "values"}
    if unknown:
        raise ConfigError(f"unknown sweep keys: {sorted(unknown)}")
    return SweepSpec(sweep.get("axis"), tuple(sweep.get("values") or ()), scenario_from_dict(data))


def load_document(path=None, preset: str | None = None) -> dict:
    """Raw YAML mapping from a file or a bundled preset."""
    if (path is None) == (preset is None):
        raise ConfigError("give exactly one of a config path or a preset name")
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(f"unknown preset {preset!r}; choose from {PRESETS}")
        text = resources.files(__package__).joinpath("presets", f"{preset}.yaml").read_text()
        source = f"preset {preset}"
    else:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        source = str(path)
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{source}: invalid YAML: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{source}: expected a mapping at top level")
    return data


def load_scenario(path=None, preset=None) -> ScenarioConfig:
    return scenario_from_dict(load_document(path, preset))


def load_sweep(path=None, preset=None) -> SweepSpec:
    return sweep_from_dict(load_document(path, preset))
