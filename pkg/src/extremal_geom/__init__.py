"""Extremal constructions for line intersection graphs and box incidences."""

from .errors import (
    BudgetExceeded,
    CapExceeded,
    ExtremalGeomError,
    InfeasibleConstants,
    InvariantFailure,
    ParameterError,
    RetriesExhausted,
    SubgraphViolation,
)

__version__ = "0.1.0"
