"""Exception hierarchy shared by every module of the package."""


class ResolventError(Exception):
    """Base class for all errors raised by :mod:`resolvent_thresholds`."""


class DomainError(ResolventError, ValueError):
    """An argument lies outside the domain of the requested function."""


class PoleError(DomainError):
    """The function has a pole at the requested argument."""


class ConvergenceError(ResolventError, ArithmeticError):
    """A series tail bound could not be certified within the term budget."""


class AccuracyError(ResolventError, ArithmeticError):
    """A quadrature error estimate exceeds the requested tolerance."""


class AliasingError(ResolventError, ValueError):
    """A periodic grid is too coarse for the requested lattice offset."""


class NonFiniteIntegrandError(ResolventError, ArithmeticError):
    """An integrand returned NaN or Inf at a quadrature node."""

    def __init__(self, message, node=None):
        super().__init__(message)
        self.node = node


class ConfigError(ResolventError, ValueError):
    """A run configuration failed validation."""
