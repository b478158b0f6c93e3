"""Exception types shared across the package.

The CLI maps DomainError/ConfigError (and subclasses) to exit code 2;
everything else propagates.
"""


class HelmgreenError(Exception):
    """Base class for all package errors."""


class DomainError(HelmgreenError):
    """Input outside the mathematical domain of an operation (e.g. Im z <= 0)."""


class PoleProximityError(DomainError):
    """Evaluation point closer to a pole than the configured floor."""


class GapViolationError(DomainError):
    """Oscillator density has support inside the forbidden gap |nu| < nu0."""


class PeriodicityError(DomainError):
    """Bloch boundary requested for a medium that is not L-periodic."""


class SingularMatrixError(HelmgreenError):
    """Banded factorization broke down (operator outside its invertibility domain)."""


class QuadratureError(HelmgreenError):
    """Quadrature failed to reach the requested tolerance."""

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class NonDecayingIntegrandError(HelmgreenError):
    """Contour integrand does not decay at the window edge; the window is too small."""


class ConfigError(HelmgreenError):
    """Malformed run configuration or medium description file."""
