"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Inputs or configuration violate a documented precondition."""


class DecodeError(RuntimeError):
    """A receiver operation cannot produce a result from the given signal."""


class CalibrationError(RuntimeError):
    """Offset calibration found no usable objective."""


class NumericalError(RuntimeError):
    """A numerical solve failed (singular or ill-conditioned system)."""
