"""Exception types shared across the package.

The CLI maps these onto exit codes: ConfigError -> 1 (usage),
DataError -> 2, everything else -> 3.
"""


class IleError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(IleError):
    """Invalid configuration or command usage."""


class DataError(IleError):
    """Malformed, inconsistent or missing data."""


class StateError(IleError):
    """Operation called on an object in the wrong state (e.g. untrained model)."""


class TrainingError(IleError):
    """Training could not be performed."""


class MissingPrototypeError(DataError):
    """No prototype distribution exists for the predicted class.

    Signals that a sample cannot be scored this iteration; callers skip it.
    """
