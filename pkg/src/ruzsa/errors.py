"""Exception hierarchy.  Everything derives from ``RuzsaError``."""


class RuzsaError(Exception):
    pass


class DomainError(RuzsaError, ValueError):
    """An element does not belong to the carrier of its group."""


class GroupMismatchError(RuzsaError, ValueError):
    pass


class NormalizationError(RuzsaError, ValueError):
    pass


class ValidationError(RuzsaError, ValueError):
    """Malformed density, matrix or file contents."""


class DegenerateDistributionError(RuzsaError, ValueError):
    """Differential entropy is -inf (point mass, zero-volume support)."""


class MarkovViolationError(RuzsaError, ValueError):
    pass


class GridResolutionError(RuzsaError, ValueError):
    pass


class PreconditionError(RuzsaError, ValueError):
    pass


class UnknownCheckError(RuzsaError, KeyError):
    pass


class TheoremViolation(RuzsaError):
    """A theorem-status check failed even after the resolution retry."""

    def __init__(self, result):
        super().__init__(f"{result.name}: slack {result.slack:.3e} < -{result.tolerance:.1e}")
        self.result = result
