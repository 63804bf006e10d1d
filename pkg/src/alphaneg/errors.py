"""Exception types shared across the package."""


class AlphanegError(Exception):
    """Base class for all alphaneg errors."""


class NonHermitianError(AlphanegError):
    """Input violated the Hermiticity tolerance."""


class NegativeSpectrumError(AlphanegError):
    """Input required to be positive semi-definite has a negative eigenvalue."""


class NotPositiveDefiniteError(AlphanegError):
    """Input required to be strictly positive definite is singular or indefinite."""


class ZeroOperatorError(AlphanegError):
    """Divergence argument is identically zero."""


class AlphaOutOfRangeError(AlphanegError):
    """Order parameter outside its admissible range."""


class InvalidStateError(AlphanegError):
    """Matrix fails the density-operator invariants (Hermitian, PSD, unit trace)."""


class NotCpptpError(AlphanegError):
    """Channel or instrument fails the PPT-preserving hypothesis."""


class UnsupportedMapError(AlphanegError):
    """Positive map lacks the properties the generic solver relies on."""


class CommutationFailedError(AlphanegError):
    """Instrument element does not commute with the declared positive map."""


class OutOfDomainError(AlphanegError):
    """Closed-form parameter outside its stated domain."""


class NotConvergedError(AlphanegError):
    """Iterative routine exhausted its budget.

    Carries the best partial result so callers can still report a value.
    """

    def __init__(self, message, result=None, iterate=None, residual=None):
        super().__init__(message)
        self.result = result
        self.iterate = iterate
        self.residual = residual
