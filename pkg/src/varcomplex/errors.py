"""Exception hierarchy shared by every module of the package."""


class VarComplexError(Exception):
    """Base class for all errors raised by :mod:`varcomplex`."""


class InvalidArgument(VarComplexError, ValueError):
    """Malformed input: wrong shape, non-finite entries, bad index sets."""


class UnsupportedConfiguration(VarComplexError, ValueError):
    """A (group, dimension) pair for which no generator is implemented."""


class DomainError(VarComplexError, ValueError):
    """A matrix argument lies outside the declared group domain, or a probe
    point lies outside the integration box."""


class IntegrationBudgetExceeded(VarComplexError, RuntimeError):
    """The RK4 step count would exceed the configured cap."""


class IntegrandError(VarComplexError, FloatingPointError):
    """An integrand returned a non-finite value at a quadrature node."""

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class TangencyViolation(VarComplexError, RuntimeError):
    """A map's Jacobian left its group by more than the allowed residual."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class ChartSingularity(VarComplexError, ValueError):
    """Chart point too close to X = 0 in the SL(2) coordinates."""


class NeedsMoreSamples(VarComplexError, ValueError):
    """Least-squares fit would be underdetermined."""
