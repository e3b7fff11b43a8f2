"""Exception hierarchy.

Validation problems derive from :class:`ValueError` so callers that only care
about bad input can catch that; numerical failures derive from
:class:`ArithmeticError`.
"""


class SoilKrigeError(Exception):
    """Base class for all package errors."""


class ValidationError(SoilKrigeError, ValueError):
    """An argument or input record violates its domain constraints."""


class OutOfBoundsError(ValidationError, IndexError):
    """A location lies outside the grid extent."""


class ConfigError(ValidationError):
    """A run configuration could not be parsed or validated.

    ``field`` names the offending key (dotted path) and ``line`` the 1-based
    line number in the source file, when known.
    """

    def __init__(self, message, field=None, line=None):
        self.field = field
        self.line = line
        prefix = []
        if field is not None:
            prefix.append(f"{field}")
        if line is not None:
            prefix.append(f"line {line}")
        if prefix:
            message = f"{', '.join(prefix)}: {message}"
        super().__init__(message)


class SchemaError(ValidationError):
    """A CSV file does not match any supported column layout."""


class InsufficientDataError(SoilKrigeError, ValueError):
    """Too few samples or bins to carry out an estimate."""


class ExhaustedError(SoilKrigeError):
    """No unvisited reachable cell is left to choose from."""


class NumericalError(SoilKrigeError, ArithmeticError):
    """A numerical procedure failed."""


class SingularMatrixError(NumericalError):
    """The kriging system is numerically singular."""


class NegativeVarianceError(NumericalError):
    """A prediction variance came out clearly negative."""


class GenerationError(NumericalError):
    """A random field could not be generated from the given covariance."""


class UndefinedCorrelationError(NumericalError):
    """Correlation is undefined because one of the vectors is constant."""


class DivisionGuardError(NumericalError, ZeroDivisionError):
    """A normalizing denominator is zero."""
