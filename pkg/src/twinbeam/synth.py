"""Synthetic spectrum-analyzer traces and power-curve datasets.

Everything here is a controlled stand-in for the lab instruments: good
enough to stress the fitting and inference pipelines end to end, with no
pretense of modelling analyzer internals.  Resolution bandwidth becomes a
moving-average smoothing of width ``rbw / bin_spacing`` bins; video
bandwidth scales the dB-domain trace jitter as ``sqrt(vbw_ref / vbw)`` with
``vbw_ref`` = 100 Hz (narrower VBW averages more, so jitters less).

The relaxation-oscillation excess noise of a single beam is represented
purely phenomenologically as a Lorentzian peak whose center frequency rises
(and height falls) with pump power; the default pump map below is
calibrated to shape only, not to any quantitative theory.

Every generator is deterministic given its seed; sum and difference traces
draw from independent streams derived from (seed, trace index).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.ndimage import uniform_filter1d

from .errors import BelowThresholdError, GridMismatchError, InvalidParameterError
from .fitting import PowerDataset
from .opo import CavityParams, NoiseSpectrum, OperatingPoint, from_db, single_beam_spectrum, to_db

__all__ = [
    "VBW_REFERENCE_HZ",
    "TraceGenConfig",
    "RelaxationPeakModel",
    "default_pump_map",
    "synth_power_dataset",
    "excess_noise_profile",
    "synth_noise_trace",
    "pump_sweep_scenario",
]

VBW_REFERENCE_HZ = 100.0


@dataclass(frozen=True)
class TraceGenConfig:
    """Grid, smoothing and jitter settings for one synthetic trace."""

    seed: int = 0
    jitter_db: float = 0.0
    rbw_hz: float = 100e3
    vbw_hz: float = 100.0
    n_bins: int = 200
    f_min_hz: float = 1e6
    f_max_hz: float = 50e6

    def __post_init__(self):
        if self.jitter_db < 0:
            raise InvalidParameterError("jitter_db must be >= 0")
        if self.n_bins < 2:
            raise InvalidParameterError("n_bins must be >= 2")
        if not 0 < self.f_min_hz < self.f_max_hz:
            raise InvalidParameterError("need 0 < f_min_hz < f_max_hz")
        if self.rbw_hz <= 0 or self.vbw_hz <= 0:
            raise InvalidParameterError("rbw_hz and vbw_hz must be positive")

    @property
    def freqs_hz(self) -> np.ndarray:
        return np.linspace(self.f_min_hz, self.f_max_hz, self.n_bins)

    @property
    def bin_spacing_hz(self) -> float:
        return (self.f_max_hz - self.f_min_hz) / (self.n_bins - 1)


@dataclass(frozen=True)
class RelaxationPeakModel:
    """Lorentzian excess-noise peak, optionally re-parameterized by pump.

    ``pump_map(s) -> (f_center_hz, height)`` overrides the static center and
    height during pump sweeps; it must not decrease the center frequency as
    ``s`` grows.
    """

    f_center_hz: float
    width_hz: float
    height: float
    pump_map: Callable[[float], tuple[float, float]] | None = None

    def __post_init__(self):
        if self.f_center_hz <= 0:
            raise InvalidParameterError("f_center_hz must be positive")
        if self.width_hz <= 0:
            raise InvalidParameterError("width_hz must be positive")
        if self.height < 0:
            raise InvalidParameterError("height must be >= 0")


def default_pump_map(s: float) -> tuple[float, float]:
    """Qualitative pump dependence of the relaxation peak.

    Center rises 2 -> 12 MHz and height falls 30 -> 5 (shot-noise units)
    linearly over threshold factors 1.4 -> 6.5, clamped outside.  Shape
    only; do not read quantitative meaning into these numbers.
    """
    t = float(np.clip((s - 1.4) / (6.5 - 1.4), 0.0, 1.0))
    return 2e6 + t * 10e6, 30.0 - t * 25.0


def synth_power_dataset(
    truth: OperatingPoint,
    n_points: int,
    noise_frac: float,
    seed: int,
    *,
    p_min_mw: float | None = None,
    p_max_mw: float | None = None,
) -> PowerDataset:
    """Power-curve data on the square-root law with multiplicative noise.

    Pump powers are spaced linearly over ``[p_min_mw, p_max_mw]`` (defaults:
    2x to 13x threshold) and outputs are ``model * (1 + noise_frac * g)``
    with ``g`` standard normal from the seeded generator.
    """
    if n_points < 4:
        raise InvalidParameterError("n_points must be >= 4")
    if noise_frac < 0:
        raise InvalidParameterError("noise_frac must be >= 0")
    p_th = truth.p_threshold_mw
    lo = 2.0 * p_th if p_min_mw is None else p_min_mw
    hi = 13.0 * p_th if p_max_mw is None else p_max_mw
    if not p_th < lo < hi:
        raise BelowThresholdError("pump range must lie strictly above threshold")
    pump = np.linspace(lo, hi, n_points)
    out = 2.0 * truth.epsilon * (np.sqrt(p_th * pump) - p_th)
    if noise_frac > 0:
        g = np.random.default_rng(seed).standard_normal(n_points)
        out = out * (1.0 + noise_frac * g)
    return PowerDataset(pump, out)


def excess_noise_profile(freqs_hz, peak: RelaxationPeakModel) -> np.ndarray:
    """Lorentzian excess noise per bin: height at the center, half at
    center +- width/2 (FWHM convention)."""
    f = np.asarray(freqs_hz, dtype=float)
    half_w_sq = (0.5 * peak.width_hz) ** 2
    return peak.height * half_w_sq / ((f - peak.f_center_hz) ** 2 + half_w_sq)


def _smooth(values: np.ndarray, cfg: TraceGenConfig) -> np.ndarray:
    size = max(1, round(cfg.rbw_hz / cfg.bin_spacing_hz))
    if size <= 1:
        return values.copy()
    return uniform_filter1d(values, size=size, mode="nearest")


def _jitter(values: np.ndarray, cfg: TraceGenConfig, stream: int) -> np.ndarray:
    if cfg.jitter_db == 0:
        return values
    if np.any(values <= 0):
        raise InvalidParameterError("dB-domain jitter needs positive trace values")
    sigma = cfg.jitter_db * np.sqrt(VBW_REFERENCE_HZ / cfg.vbw_hz)
    rng = np.random.default_rng((cfg.seed, stream))
    return from_db(to_db(values) + sigma * rng.standard_normal(values.size))


def synth_noise_trace(
    model: NoiseSpectrum,
    v_ex_profile,
    cfg: TraceGenConfig,
) -> tuple[NoiseSpectrum, NoiseSpectrum]:
    """Simulated analyzer (sum, difference) traces for a model spectrum.

    The sum trace is model + excess noise, RBW-smoothed then dB-jittered;
    the difference (shot-noise) trace is a smoothed, independently jittered
    flat line at 1.  With zero jitter and unit smoothing width the pair is
    exactly (model + excess, ones), so
    :func:`twinbeam.detection.normalize_to_snl` inverts the construction.
    """
    freqs = cfg.freqs_hz
    if not np.array_equal(model.freqs_hz, freqs):
        raise GridMismatchError("model spectrum is not on the config grid")
    if v_ex_profile is None:
        v_ex = np.zeros(cfg.n_bins)
    else:
        v_ex = np.asarray(v_ex_profile, dtype=float)
        if v_ex.shape != freqs.shape:
            raise GridMismatchError("excess-noise profile is not on the config grid")
        if np.any(v_ex < 0):
            raise InvalidParameterError("excess noise must be >= 0")
    sum_values = _jitter(_smooth(model.values + v_ex, cfg), cfg, stream=0)
    diff_values = _jitter(_smooth(np.ones(cfg.n_bins), cfg), cfg, stream=1)
    make = lambda vals: NoiseSpectrum(freqs, vals, rbw_hz=cfg.rbw_hz, vbw_hz=cfg.vbw_hz)
    return make(sum_values), make(diff_values)


def pump_sweep_scenario(
    s_values,
    cavity: CavityParams,
    peak: RelaxationPeakModel,
    freqs_hz,
    *,
    rbw_hz: float = 100e3,
    vbw_hz: float = 100.0,
) -> list[tuple[float, NoiseSpectrum]]:
    """Single-beam spectra with injected excess peaks across a pump sweep.

    For each threshold factor the peak center/height come from the model's
    pump map (or its static values when no map is set); results are ordered
    by ``s``.  The map is checked on the fly: a center that moves down with
    pump is rejected.
    """
    s_sorted = sorted(float(s) for s in np.atleast_1d(s_values))
    if not s_sorted:
        raise InvalidParameterError("s_values must be non-empty")
    if s_sorted[0] < 1.0:
        raise BelowThresholdError("all threshold factors must be >= 1")
    results = []
    last_center = -np.inf
    for s in s_sorted:
        if peak.pump_map is not None:
            f_center, height = peak.pump_map(s)
        else:
            f_center, height = peak.f_center_hz, peak.height
        if f_center < last_center:
            raise InvalidParameterError(
                "pump map moved the peak center down with increasing pump"
            )
        last_center = f_center
        local = RelaxationPeakModel(f_center, peak.width_hz, height)
        base = single_beam_spectrum(freqs_hz, cavity, s, rbw_hz=rbw_hz, vbw_hz=vbw_hz)
        values = base.values + excess_noise_profile(freqs_hz, local)
        results.append((s, NoiseSpectrum(base.freqs_hz, values, rbw_hz=rbw_hz, vbw_hz=vbw_hz)))
    return results
