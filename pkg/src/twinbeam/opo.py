"""Closed-form model of a triply resonant OPO emitting quantum-correlated twin beams.

Above threshold the cavity converts a pump at power ``P_p`` into a pair of
cross-polarized signal/idler beams.  Three steady-state expressions cover
everything in this module; noise is always in shot-noise-normalized linear
units (1.0 = shot-noise limit, SNL).

Output power versus pump, valid at or above the threshold ``P_th``::

    P_out = 2 * eps * (sqrt(P_th * P_p) - P_th)

or, with the threshold factor ``s = P_p / P_th`` and ``p_out = P_out / P_th``::

    p_out = 2 * eps * (sqrt(s) - 1)

``eps`` is the power slope efficiency of the output at threshold.

Intensity-difference noise of the twin beams, a Lorentzian dip below the
SNL whose depth is capped by the cavity escape efficiency ``eta_e`` and the
total detection efficiency ``eta_d``::

    S_diff(f) = 1 - eta_e * eta_d / (1 + (f / linewidth)**2)

Intensity noise of a single beam of the pair (no detection efficiency here;
refer it to a lossy detector with :func:`twinbeam.detection.attenuate_quantum`)::

    S_single(f) = 1 - eta_e * sqrt(s) * (sqrt(s) - 2)
                  / (2 * (1 + x**2) * ((sqrt(s) - 1)**2 + x**2)),  x = f / linewidth

The single beam dips below the SNL only for ``s > 4``, is exactly shot-noise
limited at ``s = 4``, and approaches half the SNL at ``f = 0`` for
``s -> inf`` with a lossless cavity.

All functions are pure and accept caller-supplied frequency grids; nothing
is resampled or cached, so concurrent use needs no coordination.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .errors import BelowThresholdError, InvalidParameterError

__all__ = [
    "DEFAULT_LINEWIDTH_HZ",
    "CavityParams",
    "OperatingPoint",
    "DetectionChain",
    "NoiseSpectrum",
    "escape_efficiency",
    "output_power",
    "normalized_output",
    "threshold_factor",
    "twin_difference_spectrum",
    "single_beam_spectrum",
    "to_db",
    "from_db",
]

# Linewidth that puts the default cavity (below) plus 90% detection exactly
# on a -7.2 dB twin-beam dip at a 3 MHz analysis frequency.  It is only a
# documented default: the linewidth stays a free, fittable parameter.
DEFAULT_LINEWIDTH_HZ = 17.5e6


@dataclass(frozen=True)
class CavityParams:
    """Loss budget and linewidth of the OPO cavity.

    Parameters
    ----------
    t_out : float
        Power transmission of the output coupler, in (0, 1].
    t_hr : float
        Power transmission of the high-reflectivity facet, in [0, 1).
    loss_extra : float
        Residual round-trip intracavity loss, in [0, 1).
    linewidth_hz : float
        Cavity linewidth in Hz (scale frequency of the Lorentzian response).
    """

    t_out: float
    t_hr: float = 0.0
    loss_extra: float = 0.0
    linewidth_hz: float = DEFAULT_LINEWIDTH_HZ

    def __post_init__(self):
        if not 0.0 < self.t_out <= 1.0:
            raise InvalidParameterError(f"t_out must be in (0, 1], got {self.t_out}")
        if not 0.0 <= self.t_hr < 1.0:
            raise InvalidParameterError(f"t_hr must be in [0, 1), got {self.t_hr}")
        if not 0.0 <= self.loss_extra < 1.0:
            raise InvalidParameterError(
                f"loss_extra must be in [0, 1), got {self.loss_extra}"
            )
        if self.t_out + self.t_hr + self.loss_extra > 1.0:
            raise InvalidParameterError("total cavity loss exceeds 1")
        if not self.linewidth_hz > 0.0:
            raise InvalidParameterError(
                f"linewidth_hz must be positive, got {self.linewidth_hz}"
            )

    @property
    def eta_e(self) -> float:
        """Escape efficiency of this cavity."""
        return escape_efficiency(self)


@dataclass(frozen=True)
class OperatingPoint:
    """Pump power, threshold power and slope efficiency of one operating point.

    Powers are in mW; ``epsilon`` is the dimensionless power slope efficiency.
    """

    p_pump_mw: float
    p_threshold_mw: float
    epsilon: float

    def __post_init__(self):
        if not self.p_threshold_mw > 0.0:
            raise InvalidParameterError(
                f"p_threshold_mw must be positive, got {self.p_threshold_mw}"
            )
        if not self.epsilon > 0.0:
            raise InvalidParameterError(f"epsilon must be positive, got {self.epsilon}")
        if self.p_pump_mw < 0.0:
            raise InvalidParameterError(
                f"p_pump_mw must be non-negative, got {self.p_pump_mw}"
            )

    @property
    def s(self) -> float:
        """Threshold factor, pump power over threshold power."""
        return threshold_factor(self.p_pump_mw, self.p_threshold_mw)


@dataclass(frozen=True)
class DetectionChain:
    """Detection efficiency budget: photodiode quantum efficiency times
    propagation efficiency."""

    eta_pd: float = 1.0
    eta_prop: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.eta_pd <= 1.0:
            raise InvalidParameterError(f"eta_pd must be in [0, 1], got {self.eta_pd}")
        if not 0.0 <= self.eta_prop <= 1.0:
            raise InvalidParameterError(
                f"eta_prop must be in [0, 1], got {self.eta_prop}"
            )

    @property
    def eta_d(self) -> float:
        """Total detection efficiency."""
        return self.eta_pd * self.eta_prop


@dataclass(frozen=True)
class NoiseSpectrum:
    """Shot-noise-normalized (or raw-power) spectrum on a fixed frequency grid.

    ``values`` are linear noise powers per frequency bin; for normalized
    spectra 1.0 means shot-noise limited.  ``rbw_hz``/``vbw_hz`` are the
    resolution and video bandwidths the trace was (or pretends to have been)
    recorded with; they are metadata and do not affect the values.
    """

    freqs_hz: NDArray[np.float64]
    values: NDArray[np.float64]
    rbw_hz: float = 100e3
    vbw_hz: float = 100.0

    def __post_init__(self):
        freqs = np.atleast_1d(np.asarray(self.freqs_hz, dtype=float))
        values = np.atleast_1d(np.asarray(self.values, dtype=float))
        if freqs.ndim != 1 or values.ndim != 1 or freqs.size != values.size:
            raise InvalidParameterError("freqs_hz and values must be 1-D, same length")
        if freqs.size == 0:
            raise InvalidParameterError("spectrum must have at least one bin")
        if freqs.size > 1 and not np.all(np.diff(freqs) > 0):
            raise InvalidParameterError("freqs_hz must be strictly increasing")
        if not np.all(values >= 0):
            raise InvalidParameterError("noise values must be non-negative")
        if not self.rbw_hz > 0:
            raise InvalidParameterError(f"rbw_hz must be positive, got {self.rbw_hz}")
        if not self.vbw_hz > 0:
            raise InvalidParameterError(f"vbw_hz must be positive, got {self.vbw_hz}")
        freqs.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "freqs_hz", freqs)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return self.freqs_hz.size

    def same_grid(self, other: "NoiseSpectrum") -> bool:
        """True when both spectra share one frequency grid, bin for bin."""
        return np.array_equal(self.freqs_hz, other.freqs_hz)

    @property
    def values_db(self) -> NDArray[np.float64]:
        """Values converted to dB relative to the shot-noise limit."""
        return to_db(self.values)


def escape_efficiency(cavity: CavityParams) -> float:
    """Fraction of the total round-trip loss due to the output coupler.

    This is the ceiling on any noise reduction observable outside the
    cavity: only photons leaving through the output coupler are detected.
    """
    total = cavity.t_out + cavity.t_hr + cavity.loss_extra
    if total <= 0.0:
        raise InvalidParameterError("total cavity loss is zero")
    return cavity.t_out / total


def output_power(op: OperatingPoint) -> float:
    """Steady-state total output power in mW at the given operating point.

    Raises
    ------
    BelowThresholdError
        If the pump power is below the threshold power; the square-root law
        holds only above threshold.
    """
    if op.p_pump_mw < op.p_threshold_mw:
        raise BelowThresholdError(
            f"pump {op.p_pump_mw} mW below threshold {op.p_threshold_mw} mW"
        )
    return 2.0 * op.epsilon * (
        np.sqrt(op.p_threshold_mw * op.p_pump_mw) - op.p_threshold_mw
    )


def normalized_output(s, epsilon):
    """Output power in units of the threshold power, ``2*eps*(sqrt(s) - 1)``.

    Accepts scalar or array threshold factors ``s >= 1``.
    """
    s_arr = np.asarray(s, dtype=float)
    if np.any(s_arr < 1.0):
        raise BelowThresholdError("threshold factor s must be >= 1")
    out = 2.0 * epsilon * (np.sqrt(s_arr) - 1.0)
    return float(out) if out.ndim == 0 else out


def threshold_factor(p_pump_mw: float, p_threshold_mw: float) -> float:
    """Pump power divided by threshold power."""
    if not p_threshold_mw > 0.0:
        raise InvalidParameterError(
            f"p_threshold_mw must be positive, got {p_threshold_mw}"
        )
    return p_pump_mw / p_threshold_mw


def twin_difference_spectrum(
    freqs_hz,
    cavity: CavityParams,
    det: DetectionChain,
    *,
    rbw_hz: float = 100e3,
    vbw_hz: float = 100.0,
) -> NoiseSpectrum:
    """Intensity-difference noise spectrum of the twin beams.

    Parameters
    ----------
    freqs_hz : array_like
        Strictly increasing analysis frequencies in Hz.
    cavity : CavityParams
        Supplies the escape efficiency and linewidth.
    det : DetectionChain
        Total detection efficiency applied to the correlation dip.

    Returns
    -------
    NoiseSpectrum
        ``1 - eta_e*eta_d / (1 + (f/linewidth)**2)`` per bin: a dip of depth
        ``eta_e*eta_d`` at DC, recovering the shot-noise limit as f -> inf.
    """
    f = np.asarray(freqs_hz, dtype=float)
    depth = escape_efficiency(cavity) * det.eta_d
    values = 1.0 - depth / (1.0 + (f / cavity.linewidth_hz) ** 2)
    return NoiseSpectrum(f, values, rbw_hz=rbw_hz, vbw_hz=vbw_hz)


def single_beam_spectrum(
    freqs_hz,
    cavity: CavityParams,
    s: float,
    *,
    rbw_hz: float = 100e3,
    vbw_hz: float = 100.0,
) -> NoiseSpectrum:
    """Intensity noise spectrum of a single beam of the pair.

    Evaluated with the escape efficiency only; detector losses are a
    separate stage (see module docstring).  Squeezing (values < 1) appears
    iff ``s > 4``; at ``s = 4`` the factor ``sqrt(s) - 2`` vanishes and the
    beam is exactly shot-noise limited at every frequency.

    Raises
    ------
    BelowThresholdError
        If ``s < 1``.
    """
    if s < 1.0:
        raise BelowThresholdError(f"threshold factor s must be >= 1, got {s}")
    f = np.asarray(freqs_hz, dtype=float)
    x2 = (f / cavity.linewidth_hz) ** 2
    rs = np.sqrt(s)
    eta_e = escape_efficiency(cavity)
    with np.errstate(divide="ignore"):  # s == 1 diverges at f == 0
        values = 1.0 - eta_e * rs * (rs - 2.0) / (
            2.0 * (1.0 + x2) * ((rs - 1.0) ** 2 + x2)
        )
    return NoiseSpectrum(f, values, rbw_hz=rbw_hz, vbw_hz=vbw_hz)


def to_db(linear):
    """Linear power ratio to dB. Input must be positive."""
    arr = np.asarray(linear, dtype=float)
    if np.any(arr <= 0):
        raise InvalidParameterError("to_db requires positive linear values")
    out = 10.0 * np.log10(arr)
    return float(out) if out.ndim == 0 else out


def from_db(db):
    """dB to linear power ratio."""
    out = np.power(10.0, np.asarray(db, dtype=float) / 10.0)
    return float(out) if out.ndim == 0 else out
