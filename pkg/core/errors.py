"""
Exception hierarchy for the chain entanglement toolkit.
"""

from typing import Optional


class ChainError(Exception):
    """Base class for all toolkit failures."""


class DomainError(ChainError, ValueError):
    """A parameter lies outside the domain of the requested operation."""


class ConvergenceError(ChainError, ArithmeticError):
    """A series, root-finder or quadrature did not reach its tolerance."""


class UnmappedModeError(DomainError):
    """A Williamson mode is too weakly entangled to be mapped across the partition."""


class ConfigError(ChainError):
    """Configuration file or command-line parameters are invalid."""


class NumericalStageError(ChainError):
    """A numerical failure inside a named pipeline stage."""

    def __init__(self, stage: str, message: str, cause: Optional[BaseException] = None):
        """
        Args:
            stage: Pipeline stage that failed (e.g. "symplectic_spectrum")
            message: Human readable description
            cause: Underlying exception, if any
        """
        super().__init__(f"{stage}: {message}")
        self.stage = stage
        self.message = message
        self.cause = cause
