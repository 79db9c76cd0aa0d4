"""Bi-objective TSP Pareto-front toolkit.

Approximates Pareto fronts by decomposing objective space into preference
cones and solving one Lagrangian-constrained problem per cone, alongside
evolutionary and scalarization baselines, hypervolume evaluation, and a
grid-map coverage-planning instance pipeline.
"""

from .core import (
    AdjacencyInstance,
    BTSPInstance,
    EuclideanInstance,
    ObjectiveVector,
    ParetoArchive,
    Tour,
    dominates,
    evaluate,
    evaluate_adjacency,
    evaluate_euclidean,
    nondominated_filter,
)
from .decomposition import (
    MultiplierState,
    PreferenceSet,
    PreferenceVector,
    cone_constraint,
    generate_preferences,
    lagrangian_reward,
    surrogate_objective,
    update_multipliers,
)
from .errors import (
    DegenerateObjectiveError,
    DivergenceError,
    InfeasibleInstanceError,
    InvalidInputError,
)
from .metrics import ReferencePoint, RunReport, hv_exact_2d, hv_monte_carlo, reference_point

__version__ = "0.1.0"

__all__ = [
    "AdjacencyInstance",
    "BTSPInstance",
    "DegenerateObjectiveError",
    "DivergenceError",
    "EuclideanInstance",
    "InfeasibleInstanceError",
    "InvalidInputError",
    "MultiplierState",
    "ObjectiveVector",
    "ParetoArchive",
    "PreferenceSet",
    "PreferenceVector",
    "ReferencePoint",
    "RunReport",
    "Tour",
    "cone_constraint",
    "dominates",
    "evaluate",
    "evaluate_adjacency",
    "evaluate_euclidean",
    "generate_preferences",
    "hv_exact_2d",
    "hv_monte_carlo",
    "lagrangian_reward",
    "nondominated_filter",
    "reference_point",
    "surrogate_objective",
    "update_multipliers",
    "__version__",
]
