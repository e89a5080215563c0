"""Exception types shared across the package.

The CLI maps these onto distinct exit codes, so library code should raise
the most specific class that applies.
"""


class SparseroofError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(SparseroofError):
    """Invalid configuration: profiles, model specs, flags, or call arguments."""


class DataError(SparseroofError):
    """Invalid input data: accuracy tables, measurements, or matrix files."""


class InconsistencyError(DataError):
    """Measured data is physically impossible (faster than speed of light)."""
