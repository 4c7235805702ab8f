"""Error taxonomy shared across the package.

Three failure families map onto the CLI exit discipline: invalid inputs
and unusable model parameters exit with status 2, exceeded work budgets
(including quadrature that fails to converge within its subdivision cap)
exit with status 3.
"""

from __future__ import annotations


class LookbackError(Exception):
    """Base class for all package-specific failures."""


class DomainError(LookbackError, ValueError):
    """An argument lies outside the operation's documented domain."""


class ModelError(LookbackError, ValueError):
    """Market and lattice inputs are individually valid but jointly unusable,
    e.g. a period count too small to keep the risk-neutral probability in (0, 1)."""


class BudgetError(LookbackError, RuntimeError):
    """A work cap was exceeded (enumeration size, tree size, subdivision limit)."""


class ConvergenceError(BudgetError):
    """Adaptive quadrature failed to meet its tolerance within the allowed
    subdivisions.  Carries the best estimate so callers can inspect it."""

    def __init__(self, message: str, best_estimate: float) -> None:
        super().__init__(message)
        self.best_estimate = best_estimate
