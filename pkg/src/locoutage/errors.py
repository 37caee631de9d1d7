"""Exception types shared across the package."""


class DomainError(ValueError):
    """An input lies outside the domain where an operation is defined."""


class ConvergenceError(ArithmeticError):
    """A numerical procedure failed to reach its tolerance.

    The partial value and the error estimate at the point of failure are kept
    so callers can decide whether the result is still usable.
    """

    def __init__(self, message, value=float("nan"), error=float("inf")):
        super().__init__(message)
        self.value = value
        self.error = error
