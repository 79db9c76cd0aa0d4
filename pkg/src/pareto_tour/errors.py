"""Exception types shared across the package.

The CLI maps these onto stable exit codes: invalid input -> 2,
infeasible instance -> 3, numerical failure -> 4.
"""


class InvalidInputError(ValueError):
    """Malformed argument, file, or configuration value."""


class InfeasibleInstanceError(RuntimeError):
    """Instance cannot be built or solved (e.g. unreachable grid points)."""


class DegenerateObjectiveError(ValueError):
    """Zero objective vector where a direction is required."""


class DivergenceError(RuntimeError):
    """Numerical failure: non-finite parameters or a solver that did not converge."""
