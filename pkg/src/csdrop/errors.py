"""Shared exception types, mapped to CLI exit codes and HTTP statuses."""


class ConfigError(ValueError):
    """Invalid configuration or request parameters (CLI exit code 2)."""


class CapacityError(RuntimeError):
    """Problem size exceeds a documented enumeration cap (CLI exit code 3)."""


class DegenerateObservationError(ValueError):
    """An operation that needs observed measurements got an empty index set."""
