"""Exception types shared across the package."""


class HovwError(Exception):
    """Base class for all package errors."""


class InvalidInputError(HovwError, ValueError):
    pass


class InvalidParameterError(HovwError, ValueError):
    pass


class ConsistencyError(HovwError, RuntimeError):
    """An internal invariant was violated (e.g. a decomposition with two roots)."""


class TrainingError(HovwError):
    """Training failed; ``failures`` maps image ids to the underlying messages."""

    def __init__(self, message, failures=None):
        super().__init__(message)
        self.failures = dict(failures or {})


class EmptyIndexError(HovwError):
    pass


class ModelFormatError(HovwError):
    code = 1


class VersionMismatchError(ModelFormatError):
    code = 2


class ChecksumError(ModelFormatError):
    code = 3


class TruncatedModelError(ChecksumError):
    code = 4
