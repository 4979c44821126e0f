"""Exception types shared across the package."""


class NestedMzError(Exception):
    """Base class for all package-specific errors."""


class DomainError(NestedMzError, ValueError):
    """An argument is outside the mathematical domain of an operation."""


class TailTruncationError(DomainError):
    """A quadrature grid is too narrow: probability mass sits at its edges."""


class UndefinedCentroidError(DomainError):
    """A detector moment was requested for a state with no probability."""


class ConfigError(NestedMzError, ValueError):
    """An interferometer or run configuration is invalid."""


class ConfigParseError(ConfigError):
    """A configuration file failed to parse.

    Carries the one-based line number of the offending line when known.
    """

    def __init__(self, message: str, line_no: int | None = None):
        self.line_no = line_no
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)


class PlanError(NestedMzError, ValueError):
    """A sampling plan is unusable (aliasing, bad sizes, unresolvable tones)."""


class UndefinedWeakValueError(NestedMzError, ZeroDivisionError):
    """The pre- and post-selection states are (numerically) orthogonal."""
