"""Exception hierarchy shared across the toolkit.

Errors are grouped by the CLI exit code they map to: configuration
problems (2), data/file problems (3), and numerical-model problems (4).
"""


class SqzrxError(Exception):
    """Base class for all toolkit errors."""

    exit_code = 1


class ConfigError(SqzrxError):
    """Invalid or inconsistent run configuration."""

    exit_code = 2


class DataError(SqzrxError):
    """Missing, malformed, or incompatible data files/inputs."""

    exit_code = 3


class NumericalError(SqzrxError):
    """A numerical model failed to converge or produced unphysical output."""

    exit_code = 4


# --- dsp ---

class PilotNotFound(DataError):
    """No sufficiently strong pilot line inside the search window."""


class DegeneratePolarization(SqzrxError):
    """Polarization already aligned; recovery would be a no-op.

    Raised only internally; the public API returns an identity result
    with a flag instead of failing.
    """


class DivergenceDetected(NumericalError):
    """UKF innovation variance ran away from its steady-state value."""


class AmbiguousRotation(NumericalError):
    """Quadrature variances too symmetric for the rotation angle to be identifiable."""


class FitDiverged(NumericalError):
    """Squeezing-model fit residual exceeded the acceptable baseline."""


# --- gaussian / qkd ---

class NonPhysical(NumericalError):
    """Covariance matrix violates the uncertainty principle."""


class ModelMismatch(NumericalError):
    """No physical purification reproduces the measured covariance within tolerance."""


class InconsistentLoss(NumericalError):
    """Independent channel-loss estimates disagree beyond statistical tolerance."""
