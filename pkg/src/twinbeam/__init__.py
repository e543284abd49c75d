"""Twin-beam OPO noise toolkit.

Forward model, detection-chain simulation, synthetic spectrum-analyzer
traces and least-squares parameter estimation for quantum-correlated twin
beams from a triply resonant optical parametric oscillator.

The package splits into four layers:

* :mod:`twinbeam.opo` -- closed-form output power and noise spectra,
* :mod:`twinbeam.detection` -- splitting, loss propagation and the two-step
  squeezing inference,
* :mod:`twinbeam.fitting` -- linear/nonlinear least squares with a
  brute-force grid oracle and bootstrap cross-checks,
* :mod:`twinbeam.synth` -- deterministic synthetic traces and datasets,
* :mod:`twinbeam.cli` -- the ``twinbeam`` command-line front end.
"""

from .errors import (
    BelowThresholdError,
    DomainViolationError,
    GridMismatchError,
    InsufficientDataError,
    InvalidParameterError,
    NegativeExcessNoiseError,
    ShotNoiseDataError,
    SingularFitError,
    TwinBeamError,
    UnidentifiableError,
    UnphysicalInferenceWarning,
)
from .opo import (
    DEFAULT_LINEWIDTH_HZ,
    CavityParams,
    DetectionChain,
    NoiseSpectrum,
    OperatingPoint,
    escape_efficiency,
    from_db,
    normalized_output,
    output_power,
    single_beam_spectrum,
    threshold_factor,
    to_db,
    twin_difference_spectrum,
)
from .detection import (
    LossElement,
    NoiseBudget,
    TwoStepReading,
    attenuate_classical,
    attenuate_quantum,
    decompose_noise,
    detected_noise_after_loss,
    infer_squeezing,
    normalize_to_snl,
    splitter_transmission,
    two_step_measurement,
)
from .fitting import (
    FitResult,
    PowerDataset,
    bootstrap_power_fit,
    fit_diff_spectrum,
    fit_linear,
    fit_power_curve,
    grid_search_oracle,
    power_model,
    power_model_jacobian,
)
from .synth import (
    VBW_REFERENCE_HZ,
    RelaxationPeakModel,
    TraceGenConfig,
    default_pump_map,
    excess_noise_profile,
    pump_sweep_scenario,
    synth_noise_trace,
    synth_power_dataset,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # errors
    "TwinBeamError",
    "InvalidParameterError",
    "BelowThresholdError",
    "GridMismatchError",
    "ShotNoiseDataError",
    "NegativeExcessNoiseError",
    "SingularFitError",
    "UnidentifiableError",
    "DomainViolationError",
    "InsufficientDataError",
    "UnphysicalInferenceWarning",
    # forward model
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
    # detection chain
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
    # fitting
    "PowerDataset",
    "FitResult",
    "power_model",
    "power_model_jacobian",
    "fit_linear",
    "fit_power_curve",
    "fit_diff_spectrum",
    "grid_search_oracle",
    "bootstrap_power_fit",
    # synthetic data
    "VBW_REFERENCE_HZ",
    "TraceGenConfig",
    "RelaxationPeakModel",
    "default_pump_map",
    "synth_power_dataset",
    "excess_noise_profile",
    "synth_noise_trace",
    "pump_sweep_scenario",
]
