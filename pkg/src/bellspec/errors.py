"""Exception types raised across the package."""


class BellSpecError(Exception):
    """Base class for all package errors."""


class InvalidInputError(BellSpecError, ValueError):
    """An argument violates a documented precondition."""


class CapacityError(BellSpecError):
    """A construction would exceed the configured qubit cap."""


class NumericError(BellSpecError, ArithmeticError):
    """A numerical routine failed to converge."""

    def __init__(self, message, iterations=None):
        super().__init__(message)
        self.iterations = iterations


class UndefinedValueError(BellSpecError, ArithmeticError):
    """The requested quantity is undefined for the given input."""


class GuardedDenominator(BellSpecError):
    """A ratio was skipped because its denominator fell below the guard.

    This is a skip signal, not a failure.
    """
