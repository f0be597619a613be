"""Exception hierarchy. The CLI maps these onto exit codes."""


class FairAssortError(Exception):
    """Base class for every error raised by this package."""


class InputError(FairAssortError, ValueError):
    """Malformed or out-of-range input (CLI exit code 2)."""


class CapacityError(InputError):
    """An enumeration would exceed the configured cap."""


class ParseError(InputError):
    """A data file could not be parsed; carries the offending line."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class NumericalError(FairAssortError, ArithmeticError):
    """Numerical breakdown: cycling, loss of definiteness, internal infeasibility (exit 3)."""


class ConvergenceError(NumericalError):
    """An iterative method hit its iteration cap."""
