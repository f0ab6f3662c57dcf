"""Exception types shared across the package."""


class PadicGasError(Exception):
    """Base class for errors raised by this package."""


class SizeLimitError(PadicGasError):
    """An enumeration size or compute budget was exceeded."""


class DimensionError(PadicGasError):
    """Operands are defined over different ground sets [n]."""


class DomainError(PadicGasError):
    """An argument violates a documented precondition."""


class PoleError(PadicGasError):
    """A factor of the form q**E - 1 vanished (or nearly vanished)."""


class ConvergenceError(PadicGasError):
    """Evaluation was requested outside the region of absolute convergence.

    ``witness`` names one violated constraint when available.
    """

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class UnsupportedRhoError(PadicGasError):
    """The operation has no implementation for this background-density family."""


class SaturationError(PadicGasError):
    """A digit matrix does not resolve all pairwise valuations at its depth."""
