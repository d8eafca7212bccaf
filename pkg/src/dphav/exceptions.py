"""Exception hierarchy for the dphav package."""


class DphavError(Exception):
    """Base class for all errors raised by dphav."""


class TruncationError(DphavError, ValueError):
    """The Fock cutoff needed for a given intensity exceeds the allowed cap."""


class NumericalError(DphavError, ArithmeticError):
    """A series, eigensolver or quadrature failed to converge."""


class VanishingAcceptanceError(DphavError, ValueError):
    """An acceptance rule keeps (numerically) no shots."""


class DomainError(DphavError, ValueError):
    """An approximation or analysis was requested outside its domain."""


class InvalidCovarianceError(DphavError, ValueError):
    """A covariance matrix violates the uncertainty relation."""


class EmptyConditionError(DphavError, ValueError):
    """No simulated record satisfies the acceptance rule."""

    def __init__(self, message, n_accepted=0):
        super().__init__(message)
        self.n_accepted = n_accepted
