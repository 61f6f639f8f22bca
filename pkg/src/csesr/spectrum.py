"""Forward model for NV-center ESR spectra.

Resonance positions follow from the Zeeman shift of the four [111] NV
orientations; the spectrum itself is a reference level minus a sum of
area-normalized Lorentzian dips.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

DEFAULT_D = 2870.0  # MHz
DEFAULT_GAMMA = 2.87  # MHz / Gauss

_TETRAHEDRAL = np.array(
    [[1.0, 1.0, 1.0], [1.0, -1.0, -1.0], [-1.0, 1.0, -1.0], [-1.0, -1.0, 1.0]]
) / np.sqrt(3.0)


class WindowError(ValueError):
    """Resonances do not fit inside the configured frequency window."""


@dataclass(frozen=True)
class NVConstants:
    zero_field_splitting: float = DEFAULT_D
    gamma: float = DEFAULT_GAMMA
    axes: np.ndarray = field(default_factory=lambda: _TETRAHEDRAL.copy())

    def __post_init__(self):
        axes = np.asarray(self.axes, dtype=float)
        if axes.shape != (4, 3):
            raise ValueError("need exactly four orientation axes")
        if self.gamma <= 0 or self.zero_field_splitting <= 0:
            raise ValueError("gamma and D must be positive")
        if np.any(np.abs(np.linalg.norm(axes, axis=1) - 1.0) > 1e-12):
            raise ValueError("orientation axes must be unit vectors")
        gram = axes @ axes.T
        off = gram[~np.eye(4, dtype=bool)]
        if np.any(np.abs(off + 1.0 / 3.0) > 1e-12):
            raise ValueError("orientation axes must form a tetrahedral family")
        object.__setattr__(self, "axes", axes)


@dataclass(frozen=True)
class BiasField:
    magnitude: float
    direction: tuple[float, float, float] = (0.0, 0.0, 1.0)

    def __post_init__(self):
        d = np.asarray(self.direction, dtype=float)
        if self.magnitude < 0:
            raise ValueError("field magnitude must be nonnegative")
        if d.shape != (3,) or abs(np.linalg.norm(d) - 1.0) > 1e-12:
            raise ValueError("field direction must be a unit 3-vector")
        object.__setattr__(self, "direction", tuple(float(x) for x in d))

    @classmethod
    def from_vector(cls, vec) -> "BiasField":
        vec = np.asarray(vec, dtype=float)
        mag = float(np.linalg.norm(vec))
        if mag == 0.0:
            return cls(0.0)
        unit = vec / mag
        # renormalize once more; a single division can leave ~1e-16 slack
        unit = unit / np.linalg.norm(unit)
        return cls(mag, tuple(unit))

    @classmethod
    def from_angles(cls, magnitude: float, theta: float, phi: float) -> "BiasField":
        direction = (
            np.sin(theta) * np.cos(phi),
            np.sin(theta) * np.sin(phi),
            np.cos(theta),
        )
        return cls(magnitude, tuple(float(x) for x in direction))


@dataclass(frozen=True)
class ResonanceSet:
    centers: np.ndarray
    widths: np.ndarray
    amplitudes: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.centers, dtype=float)
        w = np.broadcast_to(np.asarray(self.widths, dtype=float), c.shape).copy()
        a = np.broadcast_to(np.asarray(self.amplitudes, dtype=float), c.shape).copy()
        if c.shape != (8,):
            raise ValueError("a resonance set holds exactly 8 peaks")
        if np.any(np.diff(c) < 0):
            raise ValueError("centers must be sorted")
        if np.any(w <= 0):
            raise ValueError("widths must be positive")
        if np.any(a < 0):
            raise ValueError("amplitudes must be nonnegative")
        for name, arr in (("centers", c), ("widths", w), ("amplitudes", a)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def in_window(self, window) -> bool:
        lo, hi = window
        return bool(self.centers[0] >= lo and self.centers[-1] <= hi)


@dataclass(frozen=True)
class SpectrumSample:
    grid: np.ndarray
    clean_counts: np.ndarray
    noisy_counts: np.ndarray
    reference_power: float
    noise_sigma: float
    snr: float


def lorentzian(nu, center, width):
    """Area-normalized Lorentzian with full width at half maximum `width`.

    Broadcasts over all arguments. Units are 1/MHz when frequencies are
    in MHz, so ``lorentzian(...) * amplitude`` is a dip in counts.
    """
    return (2.0 / (np.pi * width)) / (1.0 + 4.0 * (nu - center) ** 2 / width**2)


def absorption(freqs, res: ResonanceSet) -> np.ndarray:
    """Total dip (counts below reference) at each frequency in `freqs`.

    This is the single code path used by every component that needs the
    noiseless lineshape, so that spectra, measurements and dictionary
    products agree bit for bit.
    """
    freqs = np.atleast_1d(np.asarray(freqs, dtype=float))
    terms = lorentzian(freqs[:, None], res.centers[None, :], res.widths[None, :])
    return np.sum(terms * res.amplitudes[None, :], axis=1)


def resonance_frequencies(field: BiasField, consts: NVConstants | None = None) -> np.ndarray:
    """Sorted m_s = -1 / +1 transition frequencies for all four orientations."""
    consts = consts or NVConstants()
    b_par = field.magnitude * np.abs(consts.axes @ np.asarray(field.direction))
    shift = consts.gamma * b_par
    d = consts.zero_field_splitting
    return np.sort(np.concatenate([d - shift, d + shift]))


def compute_resonances(
    field: BiasField,
    consts: NVConstants | None = None,
    *,
    window=None,
    width: float | np.ndarray = 10.0,
    amplitude: float | np.ndarray = 1.0,
) -> ResonanceSet:
    """Ground-truth resonance set for a bias field.

    Parameters
    ----------
    field : BiasField
    consts : NVConstants, optional
    window : (float, float), optional
        Frequency window in MHz. A field whose resonances leave the window
        raises :class:`WindowError`.
    width, amplitude : float or array of 8
        FWHM (MHz) and dip area (counts*MHz), assigned in sorted order.
    """
    centers = resonance_frequencies(field, consts)
    res = ResonanceSet(centers, width, amplitude)
    if window is not None and not res.in_window(window):
        raise WindowError(
            f"resonances span {centers[0]:.2f}..{centers[-1]:.2f} MHz, "
            f"outside window {window[0]:.2f}..{window[1]:.2f} MHz"
        )
    return res


def amplitude_for_depth(depth: float, width: float) -> float:
    """Dip area giving an isolated peak of the given depth (counts)."""
    return depth * np.pi * width / 2.0


def synthesize_spectrum(
    res: ResonanceSet,
    grid,
    reference_power: float,
    snr: float,
    rng_seed: int,
) -> SpectrumSample:
    """Sample a noisy spectrum on `grid`.

    The noise standard deviation is the deepest clean dip divided by `snr`;
    ``snr=np.inf`` gives a noiseless sample.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise ValueError("grid must be nonempty")
    if not snr > 0:
        raise ValueError("snr must be positive")
    clean = reference_power - absorption(grid, res)
    depth = float(np.max(reference_power - clean))
    sigma = depth / snr if np.isfinite(snr) else 0.0
    rng = np.random.default_rng(rng_seed)
    noisy = clean + sigma * rng.standard_normal(grid.size)
    return SpectrumSample(grid, clean, noisy, float(reference_power), sigma, float(snr))


def linear_grid(window, n_points: int) -> np.ndarray:
    lo, hi = window
    return np.linspace(lo, hi, n_points)
