"""Exception hierarchy shared by all afhos modules."""

from __future__ import annotations


class AfhosError(Exception):
    """Base class for all errors raised by afhos."""


class DomainError(AfhosError, ValueError):
    """An argument lies outside the domain where the function is defined."""


class OracleRangeError(DomainError):
    """An oracle was asked for a point outside its validated range."""


class UnsupportedModelError(AfhosError, TypeError):
    """The requested operation is not available for this hop model."""


class ConvergenceError(AfhosError, RuntimeError):
    """Adaptive quadrature did not reach its tolerance.

    The best available estimate is kept in ``partial`` so callers can still
    report it.
    """

    def __init__(self, message: str, partial=None):
        super().__init__(message)
        self.partial = partial


class InconsistencyError(AfhosError, ArithmeticError):
    """Moments violate a relation they must satisfy (e.g. negative variance)."""


class DegenerateVarianceError(AfhosError, ArithmeticError):
    """A standardized moment was requested for a (near) zero variance."""


class ConfigError(AfhosError, ValueError):
    """A link file or command-line configuration could not be parsed."""
