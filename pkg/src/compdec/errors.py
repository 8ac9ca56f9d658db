"""Shared exception taxonomy.

The CLI maps these onto exit codes: configuration and parse problems exit 2,
numeric failures exit 3 (see cli.py).
"""


class CompdecError(Exception):
    """Base class for all package-specific errors."""


class DimensionError(CompdecError, ValueError):
    """Vector lengths inconsistent with each other or with a LossSpec."""


class ConfigurationError(CompdecError, ValueError):
    """Invalid or inconsistent specification (missing psi, bad hyperparameters, ...)."""


class DomainError(CompdecError, ValueError):
    """Argument outside a mathematical function's domain."""


class RefusalError(CompdecError, ValueError):
    """Request is well-formed but too large for an exhaustive method (e.g. 2^M enumeration)."""


class DegenerateLikelihoodError(CompdecError, ArithmeticError):
    """Both hypothesis densities vanish at an observation; the posterior is undefined."""


class NumericError(CompdecError, ArithmeticError):
    """A numeric pipeline produced an unusable result (all-zero weights, NaN, ...)."""


class ParseError(CompdecError, ValueError):
    """Malformed input file; carries a line number when available."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
