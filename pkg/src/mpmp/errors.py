"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid or inconsistent configuration (maps to CLI exit code 1)."""


class EstimationError(RuntimeError):
    """Parameter estimation failed (rank collapse, out-of-range inversion)."""


class NumericalError(RuntimeError):
    """Unexpected numerical failure (maps to CLI exit code 2)."""
