"""Exception types shared across the package."""


class CensusLabError(Exception):
    """Base class for all package errors."""


class DomainError(CensusLabError, ValueError):
    """An argument lies outside the domain of the operation."""


class NoSolutionError(CensusLabError, ValueError):
    """An equation has no root in the admissible range."""


class ConvergenceError(CensusLabError, RuntimeError):
    """A root finder did not meet its residual target."""


class CapExceeded(CensusLabError):
    """A request exceeds the configured table or DP size limits."""


class AcceptanceTooLow(CensusLabError):
    """A rejection sampler accepts too rarely to be useful."""

    def __init__(self, message, pilot_draws=0, pilot_accepted=0):
        super().__init__(message)
        self.pilot_draws = pilot_draws
        self.pilot_accepted = pilot_accepted


class BudgetExhausted(CensusLabError):
    """A rejection sampler ran out of its trial budget."""
