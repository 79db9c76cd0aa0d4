"""Preference-vector machinery: cones, surrogate objective, Lagrangian reward,
and multiplier ascent.

A preference vector is a unit ray in objective space; the cone constraint
g(F, w) = 1 - cos(angle between F and w) is zero exactly on the ray. The
surrogate problem minimizes ||F|| subject to g <= 0; its Lagrangian
L = ||F|| + lambda * g is the reward every solver in this package optimizes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Sequence

from .core import ObjectiveVector
from .errors import DegenerateObjectiveError, InvalidInputError

# Ascent-rate and multiplier bounds: one maximally violated constraint
# (g = 1, batch of 1) saturates lambda_max in <= 1000 updates.
DEFAULT_ALPHA = 0.05
DEFAULT_LAMBDA_MIN = 0.0
DEFAULT_LAMBDA_MAX = 50.0

_UNIT_NORM_TOL = 1e-12


@dataclass(frozen=True)
class PreferenceVector:
    """Unit vector (w1, w2) in the nonnegative quadrant of objective space."""

    w1: float
    w2: float

    def __post_init__(self) -> None:
        if self.w1 < 0 or self.w2 < 0:
            raise InvalidInputError(f"preference components must be >= 0, got {self}")
        if abs(math.hypot(self.w1, self.w2) - 1.0) > _UNIT_NORM_TOL:
            raise InvalidInputError(f"preference vector must be unit-norm, got {self}")

    @classmethod
    def from_angle(cls, phi: float) -> "PreferenceVector":
        """Unit vector at angle ``phi`` (radians) from the f1 axis."""
        return cls(math.cos(phi), math.sin(phi))

    @property
    def angle(self) -> float:
        return math.atan2(self.w2, self.w1)


class PreferenceSet:
    """Ordered collection of preference vectors with strictly increasing angles."""

    __slots__ = ("prefs",)

    def __init__(self, prefs: Sequence[PreferenceVector]):
        prefs = tuple(prefs)
        if not prefs:
            raise InvalidInputError("preference set must contain at least one vector")
        angles = [p.angle for p in prefs]
        if any(b <= a for a, b in zip(angles, angles[1:])):
            raise InvalidInputError("preference angles must be strictly increasing")
        object.__setattr__(self, "prefs", prefs)

    def __len__(self) -> int:
        return len(self.prefs)

    def __iter__(self) -> Iterator[PreferenceVector]:
        return iter(self.prefs)

    def __getitem__(self, k: int) -> PreferenceVector:
        return self.prefs[k]


def generate_preferences(K: int) -> PreferenceSet:
    """K unit vectors uniformly dividing the quadrant by the midpoint rule.

    Angles are (k - 1/2) * (pi/2) / K for k = 1..K, which avoids the
    degenerate axis vectors (1,0) and (0,1).
    """
    if K < 1:
        raise InvalidInputError(f"K must be >= 1, got {K}")
    step = (math.pi / 2.0) / K
    return PreferenceSet([PreferenceVector.from_angle((k - 0.5) * step) for k in range(1, K + 1)])


def surrogate_objective(F: ObjectiveVector) -> float:
    """The surrogate cost J(F) = ||F||_2."""
    return F.norm()


def cone_constraint(F: ObjectiveVector, w: PreferenceVector) -> float:
    """g(F, w) = 1 - (w . F) / ||F||: zero iff F lies on the ray of w.

    Lies in [0, 1] for nonnegative F (up to floating-point rounding) and is
    invariant under positive scaling of F.
    """
    norm = F.norm()
    if norm == 0.0:
        raise DegenerateObjectiveError("cone constraint undefined for F = 0")
    return 1.0 - (w.w1 * F.f1 + w.w2 * F.f2) / norm


def lagrangian_reward(F: ObjectiveVector, w: PreferenceVector, lam: float) -> float:
    """L(F, w, lambda) = ||F|| + lambda * g(F, w)."""
    if lam < 0:
        raise InvalidInputError(f"multiplier must be >= 0, got {lam}")
    return surrogate_objective(F) + lam * cone_constraint(F, w)


@dataclass(frozen=True)
class MultiplierState:
    """Per-preference Lagrange multipliers with ascent rate and clamp bounds."""

    lambdas: tuple[float, ...]
    alpha: float = DEFAULT_ALPHA
    lambda_min: float = DEFAULT_LAMBDA_MIN
    lambda_max: float = DEFAULT_LAMBDA_MAX

    def __post_init__(self) -> None:
        object.__setattr__(self, "lambdas", tuple(float(v) for v in self.lambdas))
        if self.alpha <= 0:
            raise InvalidInputError(f"ascent rate must be > 0, got {self.alpha}")
        if self.lambda_min < 0 or self.lambda_min > self.lambda_max:
            raise InvalidInputError(
                f"need 0 <= lambda_min <= lambda_max, got [{self.lambda_min}, {self.lambda_max}]"
            )
        for lam in self.lambdas:
            if not (self.lambda_min <= lam <= self.lambda_max):
                raise InvalidInputError(
                    f"multiplier {lam} outside [{self.lambda_min}, {self.lambda_max}]"
                )

    @classmethod
    def zeros(
        cls,
        K: int,
        alpha: float = DEFAULT_ALPHA,
        lambda_min: float = DEFAULT_LAMBDA_MIN,
        lambda_max: float = DEFAULT_LAMBDA_MAX,
    ) -> "MultiplierState":
        lam0 = min(max(0.0, lambda_min), lambda_max)
        return cls((lam0,) * K, alpha, lambda_min, lambda_max)


def update_multipliers(
    state: MultiplierState, batch_g: Sequence[Sequence[float]]
) -> MultiplierState:
    """One ascent step: lambda_k <- clamp(lambda_k + alpha * sum_j g_kj).

    ``batch_g`` holds one non-empty list of constraint values per preference.
    """
    if len(batch_g) != len(state.lambdas):
        raise InvalidInputError(
            f"expected {len(state.lambdas)} constraint lists, got {len(batch_g)}"
        )
    new = []
    for lam, gs in zip(state.lambdas, batch_g):
        gs = list(gs)
        if not gs:
            raise InvalidInputError("each per-preference constraint list must be non-empty")
        stepped = lam + state.alpha * math.fsum(gs)
        new.append(min(max(stepped, state.lambda_min), state.lambda_max))
    return MultiplierState(tuple(new), state.alpha, state.lambda_min, state.lambda_max)
