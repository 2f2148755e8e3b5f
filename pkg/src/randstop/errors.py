"""Exception hierarchy shared by all modules.

The CLI maps these onto process exit codes (see ``randstop.cli``).
"""


class RandstopError(Exception):
    """Base class for all library errors."""


class ConfigError(RandstopError, ValueError):
    """Invalid or inconsistent configuration."""


class ShapeError(RandstopError, ValueError):
    """Array dimensions do not match what the operation expects."""


class DomainError(RandstopError, ValueError):
    """Input outside the mathematical domain of a function."""


class NumericalError(RandstopError, ArithmeticError):
    """Non-finite values or a failed factorization."""
