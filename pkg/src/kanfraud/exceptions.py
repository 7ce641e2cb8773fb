"""Exception hierarchy.

Every error carries the CLI exit code it maps to, so the command layer can
translate failures without a lookup table.
"""


class KanFraudError(Exception):
    exit_code = 13


class ConfigError(KanFraudError, ValueError):
    """Invalid parameters, ranges, modes or config files."""

    exit_code = 11


class InvalidRangeError(ConfigError):
    pass


class InvalidParameterError(ConfigError):
    pass


class UnsupportedDegreeError(ConfigError):
    pass


class InvalidTimesError(ConfigError):
    pass


class DataError(KanFraudError, ValueError):
    """Problems with the data itself (shape, content, class balance)."""

    exit_code = 13


class NonFiniteInputError(DataError):
    pass


class DimensionMismatchError(DataError):
    pass


class EmptyDatasetError(DataError):
    pass


class SingleClassError(DataError):
    pass


class InsufficientDataError(DataError):
    pass


class DegenerateDataError(DataError):
    pass


class MissingColumnError(DataError):
    pass


class UnparseableRowError(DataError):
    def __init__(self, line, message):
        super().__init__(f"line {line}: {message}")
        self.line = line


class AllMissingColumnError(DataError):
    pass


class ClassTooSmallError(DataError):
    pass


class LengthMismatchError(DataError):
    pass


class StorageError(KanFraudError, OSError):
    """File could not be found, read or written."""

    exit_code = 12


class MissingFileError(StorageError):
    pass


class UnreadableModelError(StorageError):
    pass
