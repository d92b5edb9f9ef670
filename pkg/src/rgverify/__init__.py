"""Verification toolkit for repunit representations (x^m - 1)/(x - 1) = N.

Exact search for representations and coincidences, the derivative structure
of f_N(x) = (log N + log(x - 1))/log x, integer points close to smooth
curves, linear forms in logarithms, regime bounds for reciprocal sums of
bases, and multiplicative dependence of (a, b, (b - 1)/(a - 1)).
"""

__version__ = "0.1.0"


class BudgetExceeded(RuntimeError):
    """A search would exceed its configured work budget."""

    def __init__(self, needed, budget):
        super().__init__(f"budget exceeded: needs ~{needed} evaluations, budget is {budget}")
        self.needed = needed
        self.budget = budget


class HypothesisError(ValueError):
    """Inputs fall outside the domain on which a bound is claimed."""
