"""Exception taxonomy shared across the toolkit.

The CLI maps these onto exit codes (config 2, input 3, numeric 4).
"""


class LungmtlError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(LungmtlError):
    """Invalid configuration value or schema violation."""


class InputError(LungmtlError):
    """Missing or malformed input data (files, masks, labels)."""


class NumericError(LungmtlError):
    """Numerical failure: non-finite activations, degenerate statistics."""
