"""Shared exception types.

ConfigurationError maps to CLI exit code 2, everything else to 1.
"""


class ConfigurationError(ValueError):
    """Invalid hyperparameter, shape, or config-file value."""


class ContractError(ValueError):
    """Caller violated an interface precondition (dimension mismatch etc.)."""


class DataError(ValueError):
    """Numeric data is unusable (non-finite entries, non-PSD matrix, ...)."""
