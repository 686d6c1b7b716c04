"""Exception types shared by the solver modules."""


class ConfigError(ValueError):
    """Invalid configuration value; ``field`` names the offending entry."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


class DomainError(ValueError):
    """Input outside the domain where an operation is defined."""


class GridMismatchError(ValueError):
    """Fields built on different grids (or mode counts) were combined."""


class AliasingError(ValueError):
    """Too few collocation angles to represent the retained Fourier modes."""


class NumericError(ArithmeticError):
    """Non-finite values, failed factorization or an unstable step."""


class ConvergenceError(RuntimeError):
    """An iteration did not reach its tolerance.

    ``history`` holds the residual (or update) norms of every iteration.
    """

    def __init__(self, message, history=()):
        super().__init__(message)
        self.history = list(history)
