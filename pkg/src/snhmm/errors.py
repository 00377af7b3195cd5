"""Exception types shared across the package."""


class SnhmmError(Exception):
    """Base class for package-specific errors."""


class ConfigurationError(SnhmmError):
    """Invalid model/run configuration (bad shapes, weights off the simplex, ...)."""


class IngestionError(SnhmmError):
    """Malformed or unusable input data; message names the offending row/cell."""


class FittingError(SnhmmError):
    """Posterior sampling failed (e.g. every chain diverged)."""
