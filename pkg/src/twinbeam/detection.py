"""Detection chain: variable splitting, loss propagation, two-step squeezing inference.

A half-wave plate at angle ``theta`` in front of a polarizing splitter acts
as a variable beam splitter with power transmission ``cos(2*theta)**2``.
The balanced detector behind it records sum and difference photocurrents:
the sum carries the beam's intensity noise, the difference calibrates the
shot-noise level, so the pointwise ratio sum/difference is the normalized
noise spectrum (:func:`normalize_to_snl`).

Loss treats the two noise components asymmetrically, and that asymmetry is
the handle used to separate them.  For a loss with power transmission
``mu``, in shot-noise units::

    quantum noise    s  ->  mu*s + (1 - mu)        (relaxes toward 1)
    classical noise  v  ->  mu*v                   (plain attenuation)

so detected noise ``v_d = v_ex + s_s`` turns into
``v_d(mu) = mu*v_ex + mu*(mu*s_s + (1 - mu))``.

Measuring a beam once directly (step I, ``v_I = v_ex + s_s``) and once mixed
50/50 with its twin with both splitter ports summed (step II,
``v_II = v_ex + s_s/2 + 1/2`` for a balanced pair) then isolates the quantum
factor::

    s_s = 1 - 2*(v_II - v_I)

which is the exact algebraic inverse of the forward model above and is what
:func:`infer_squeezing` computes.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (
    GridMismatchError,
    InvalidParameterError,
    NegativeExcessNoiseError,
    ShotNoiseDataError,
    UnphysicalInferenceWarning,
)
from .opo import NoiseSpectrum

__all__ = [
    "NoiseBudget",
    "LossElement",
    "TwoStepReading",
    "attenuate_quantum",
    "attenuate_classical",
    "detected_noise_after_loss",
    "two_step_measurement",
    "infer_squeezing",
    "decompose_noise",
    "splitter_transmission",
    "normalize_to_snl",
]


@dataclass(frozen=True)
class NoiseBudget:
    """Classical excess noise and quantum factor, both shot-noise normalized.

    ``s_s < 1`` means the quantum part is squeezed; the detected noise at the
    beam itself is ``v_d = v_ex + s_s``.
    """

    v_ex: float
    s_s: float

    def __post_init__(self):
        if np.any(np.asarray(self.v_ex) < 0):
            raise InvalidParameterError(f"v_ex must be >= 0, got {self.v_ex}")
        if np.any(np.asarray(self.s_s) <= 0):
            raise InvalidParameterError(f"s_s must be > 0, got {self.s_s}")

    @property
    def v_d(self):
        """Detected noise without any loss."""
        return self.v_ex + self.s_s


@dataclass(frozen=True)
class LossElement:
    """A passive loss with power transmission ``mu`` in [0, 1]."""

    mu: float

    def __post_init__(self):
        if not 0.0 <= self.mu <= 1.0:
            raise InvalidParameterError(f"mu must be in [0, 1], got {self.mu}")


@dataclass(frozen=True)
class TwoStepReading:
    """Detected normalized noise of the two measurement steps.

    ``v_d_one``: single beam, no added loss.  ``v_d_two``: signal and idler
    mixed 50/50 with both output ports summed.  Scalars or equal-shaped
    arrays (one reading per frequency bin).
    """

    v_d_one: float | np.ndarray
    v_d_two: float | np.ndarray

    def __post_init__(self):
        if np.any(np.asarray(self.v_d_one) < 0) or np.any(np.asarray(self.v_d_two) < 0):
            raise InvalidParameterError("readings must be non-negative")


def attenuate_quantum(s_in, loss: LossElement):
    """Quantum noise after a loss: ``mu*s_in + (1 - mu)``.

    Shot noise (1.0) is the fixed point; any other level is dragged toward
    it, which is precisely why squeezing is fragile under loss.
    """
    if np.any(np.asarray(s_in) < 0):
        raise InvalidParameterError("quantum noise must be >= 0")
    return loss.mu * s_in + (1.0 - loss.mu)


def attenuate_classical(v_ex, loss: LossElement):
    """Classical excess noise after a loss: ``mu*v_ex``.

    Note this linear-in-``mu`` rule is the model used throughout so that
    :func:`infer_squeezing` stays the exact inverse of
    :func:`two_step_measurement`; deterministic amplitude modulations would
    instead scale as ``mu**2``.
    """
    if np.any(np.asarray(v_ex) < 0):
        raise InvalidParameterError("classical noise must be >= 0")
    return loss.mu * v_ex


def detected_noise_after_loss(budget: NoiseBudget, loss: LossElement):
    """Total detected noise of a budget seen through a loss.

    ``mu*v_ex + mu*(mu*s_s + (1 - mu))``; reduces to ``v_ex + s_s`` at
    ``mu = 1`` and to 0 at ``mu = 0``.
    """
    mu = loss.mu
    return mu * budget.v_ex + mu * (mu * budget.s_s + (1.0 - mu))


def two_step_measurement(budget: NoiseBudget) -> TwoStepReading:
    """Forward model of the two-step protocol for a balanced twin pair.

    Step I measures the bare beam; step II mixes signal and idler 50/50 and
    sums both ports, i.e. twice ``detected_noise_after_loss`` at mu = 0.5
    with equal budgets.
    """
    v_one = budget.v_ex + budget.s_s
    v_two = budget.v_ex + 0.5 * budget.s_s + 0.5
    return TwoStepReading(v_one, v_two)


def infer_squeezing(reading: TwoStepReading):
    """Quantum factor from a two-step reading: ``1 - 2*(v_II - v_I)``.

    Values above 1 mean no squeezing; a non-positive result is unphysical
    and triggers :class:`UnphysicalInferenceWarning`, but is returned as-is
    rather than clipped.
    """
    s_s = 1.0 - 2.0 * (np.asarray(reading.v_d_two, dtype=float)
                       - np.asarray(reading.v_d_one, dtype=float))
    if np.any(s_s <= 0):
        warnings.warn(
            "inferred quantum factor is non-positive (unphysical); "
            "returning the raw estimate",
            UnphysicalInferenceWarning,
            stacklevel=2,
        )
    return float(s_s) if s_s.ndim == 0 else s_s


def decompose_noise(v_d, s_s) -> NoiseBudget:
    """Split detected noise into (classical excess, quantum factor).

    Raises
    ------
    NegativeExcessNoiseError
        If ``v_d < s_s``: the detected noise cannot be smaller than its
        quantum part, so the inputs are inconsistent.
    """
    if np.any(np.asarray(v_d) < np.asarray(s_s)):
        raise NegativeExcessNoiseError(
            f"detected noise {v_d} below quantum factor {s_s}"
        )
    return NoiseBudget(v_ex=v_d - s_s, s_s=s_s)


def splitter_transmission(theta_deg: float) -> tuple[LossElement, LossElement]:
    """Transmitted/reflected power split of the wave-plate + polarizer pair.

    ``theta_deg`` is the half-wave-plate angle: 0 deg passes everything,
    22.5 deg acts as a 50/50 splitter, 45 deg swaps the ports.  The two
    transmissions always sum to 1.
    """
    angle = np.deg2rad(2.0 * theta_deg)
    return LossElement(float(np.cos(angle) ** 2)), LossElement(float(np.sin(angle) ** 2))


def normalize_to_snl(sum_trace: NoiseSpectrum, diff_trace: NoiseSpectrum) -> NoiseSpectrum:
    """Shot-noise-normalize a raw sum trace by the raw difference trace.

    A pure pointwise ratio; no smoothing.  The result is 1.0 wherever the
    beam is shot-noise limited.

    Raises
    ------
    GridMismatchError
        If the traces are not on the same frequency grid.
    ShotNoiseDataError
        If the shot-noise reference has a non-positive bin (the offending
        bin index is reported).
    """
    if not sum_trace.same_grid(diff_trace):
        raise GridMismatchError("sum and difference traces are on different grids")
    bad = np.flatnonzero(diff_trace.values <= 0)
    if bad.size:
        idx = int(bad[0])
        raise ShotNoiseDataError(
            f"shot-noise trace non-positive at bin {idx} "
            f"(f = {diff_trace.freqs_hz[idx]:g} Hz)",
            bin_index=idx,
        )
    return NoiseSpectrum(
        sum_trace.freqs_hz,
        sum_trace.values / diff_trace.values,
        rbw_hz=sum_trace.rbw_hz,
        vbw_hz=sum_trace.vbw_hz,
    )
