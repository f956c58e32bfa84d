"""Exception hierarchy shared across the package.

CLI exit codes map onto this hierarchy: ConfigError -> 1, DataError -> 2,
anything else -> 3.
"""


class QRunoffError(Exception):
    """Base class for all package errors."""


class ConfigError(QRunoffError):
    """Invalid experiment configuration."""


class DataError(QRunoffError):
    """Problem with input data files or selections on them."""


class SchemaError(DataError):
    """Input file is missing required columns."""


class ContinuityError(DataError):
    """Daily record has a gap or duplicate date."""


class ParseError(DataError):
    """Unparsable or invalid value in an input file."""


class BoundsError(DataError):
    """Requested period lies outside the available series."""


class SelectionError(DataError):
    """Plot/export selection names an unknown basin or empty window."""


class DomainError(QRunoffError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class NumericError(QRunoffError, ValueError):
    """Non-finite value where a finite number is required."""


class EmptyScoreError(QRunoffError):
    """No retained days left after masking; a score cannot be formed."""


class BenchmarkDegenerateError(QRunoffError):
    """Benchmark score is non-positive; relative score undefined."""


class ScreeningFailedError(QRunoffError):
    """Every screened candidate evaluated to a non-finite objective."""
