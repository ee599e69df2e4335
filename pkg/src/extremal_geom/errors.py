"""Exception types shared across the package."""


class ExtremalGeomError(Exception):
    """Base class for all package errors."""


class ParameterError(ExtremalGeomError, ValueError):
    """A parameter violates an operation's precondition."""


class RetriesExhausted(ExtremalGeomError):
    """A randomized construction failed its post-check on every attempt."""


class BudgetExceeded(ExtremalGeomError):
    """Exact search hit its node budget; carries the best solution found."""

    def __init__(self, message, best_size, witness):
        super().__init__(message)
        self.best_size = best_size
        self.witness = witness


class CapExceeded(ExtremalGeomError):
    """Container enumeration hit its node cap; carries the partial collection."""

    def __init__(self, message, partial):
        super().__init__(message)
        self.partial = partial


class InfeasibleConstants(ExtremalGeomError):
    """The sampling-probability window is empty for the requested instance."""


class SubgraphViolation(ExtremalGeomError):
    """The block graph is not edgewise contained in the Delaunay graph."""


class InvariantFailure(ExtremalGeomError):
    """A structural invariant check failed."""
