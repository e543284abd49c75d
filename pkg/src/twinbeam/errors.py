"""Exception and warning types shared across the package."""


class TwinBeamError(Exception):
    """Base class for errors raised by this package."""


class InvalidParameterError(TwinBeamError, ValueError):
    """A parameter lies outside its documented domain."""


class BelowThresholdError(TwinBeamError, ValueError):
    """Operating point below oscillation threshold.

    The closed-form expressions for output power and single-beam noise are
    derived above threshold only; evaluating them below threshold would
    silently produce garbage, so it is a hard error.
    """


class GridMismatchError(TwinBeamError, ValueError):
    """Two traces do not share the same frequency grid."""


class ShotNoiseDataError(TwinBeamError, ValueError):
    """The shot-noise reference trace has a non-positive bin."""

    def __init__(self, message: str, bin_index: int | None = None):
        super().__init__(message)
        self.bin_index = bin_index


class NegativeExcessNoiseError(TwinBeamError, ValueError):
    """Detected noise below the quantum factor: the decomposition has no
    physical solution, signalling inconsistent inputs."""


class SingularFitError(TwinBeamError, ValueError):
    """Degenerate design matrix (e.g. all abscissas equal)."""


class UnidentifiableError(TwinBeamError, ValueError):
    """The data carry no information about the requested parameters."""


class DomainViolationError(TwinBeamError, ValueError):
    """An optimizer iterate was driven outside the model's domain."""


class InsufficientDataError(TwinBeamError, ValueError):
    """Fewer data points than the fit requires."""


class UnphysicalInferenceWarning(UserWarning):
    """An inferred quantum-noise factor came out non-positive.

    The raw value is still returned (never clipped) so that downstream
    fits can weight it honestly.
    """
