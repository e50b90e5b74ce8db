"""Exception types raised by the hyperpos package."""


class HyperposError(Exception):
    """Base class for all package errors."""


class CapExceeded(HyperposError):
    """Requested work exceeds the configured enumeration budget."""

    def __init__(self, message, required=None, budget=None):
        super().__init__(message)
        self.required = required
        self.budget = budget


class ShapeMismatch(HyperposError, ValueError):
    pass


class IndexOutOfRange(HyperposError, IndexError):
    pass


class DomainError(HyperposError, ValueError):
    """An argument lies outside the domain of a kernel or series."""


class Divergent(DomainError):
    """A hypergeometric series is nonterminating and diverges."""


class ParameterError(HyperposError, ValueError):
    """Inadmissible hypergeometric denominator parameters."""


class TolBreach(HyperposError, ArithmeticError):
    """Floating point evaluation lost more precision than allowed."""


class DegenerateSpectrum(DomainError):
    pass


class Infeasible(HyperposError, ValueError):
    """Sampling constraints cannot be satisfied."""
