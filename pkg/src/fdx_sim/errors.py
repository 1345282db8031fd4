"""Exception types raised across the package."""


class InvalidInputError(ValueError):
    """Raised when an argument violates an operation's preconditions."""


class ConfigError(ValueError):
    """Raised for malformed or inconsistent simulation configurations."""


class NumericalError(ArithmeticError):
    """Raised when a computation produces non-finite or degenerate values."""
