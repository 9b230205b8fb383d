"""Exception types raised by the solvers."""


class HybridCRError(Exception):
    """Base class for all package errors."""


class DimensionError(HybridCRError, ValueError):
    """Matrix shapes are incompatible with the requested operation."""


class DomainError(HybridCRError, ValueError):
    """Input lies outside the operation's mathematical domain."""


class SingularityError(HybridCRError, ArithmeticError):
    """A matrix that must be inverted is singular or too ill-conditioned."""


class NumericalError(HybridCRError, RuntimeError):
    """An iterative search failed to converge.

    ``diagnostics`` carries whatever state the search had at failure
    (typically the final bracket).
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class ConfigurationError(HybridCRError, ValueError):
    """A system or solver configuration violates its invariants."""
