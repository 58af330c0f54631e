"""Exception types shared across the toolkit.

The CLI maps these onto exit codes: ConfigError -> 1, DataError -> 2.
"""


class ToolkitError(Exception):
    """Base class for errors raised by this package."""


class ConfigError(ToolkitError):
    """Invalid configuration file or option."""


class DataError(ToolkitError):
    """Unreadable, unmappable, or mismatched input data."""
