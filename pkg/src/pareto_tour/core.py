"""Foundational types and exact evaluation/dominance machinery.

All types are immutable values after construction; the functions here are
pure and safe for concurrent use. Costs are computed in 64-bit floats and
dominance uses exact comparisons -- tolerances belong to the solvers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence, Union

import numpy as np

from .errors import InvalidInputError


@dataclass(frozen=True)
class ObjectiveVector:
    """Pair of tour costs (f1, f2)."""

    f1: float
    f2: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.f1) and math.isfinite(self.f2)):
            raise InvalidInputError(f"objective components must be finite, got {self}")

    def as_array(self) -> np.ndarray:
        return np.array([self.f1, self.f2], dtype=float)

    def norm(self) -> float:
        return math.hypot(self.f1, self.f2)


def dominates(a: ObjectiveVector, b: ObjectiveVector) -> bool:
    """True iff a is componentwise <= b and strictly < in at least one component."""
    return a.f1 <= b.f1 and a.f2 <= b.f2 and (a.f1 < b.f1 or a.f2 < b.f2)


class Tour:
    """A closed visiting order over cities 0..n-1.

    Canonicalized to start at city 0; tour cost is rotation-invariant, so this
    fixes a unique representative. Construction validates the permutation.
    """

    __slots__ = ("order",)

    def __init__(self, order: Sequence[int]):
        order = tuple(int(c) for c in order)
        n = len(order)
        if n < 2:
            raise InvalidInputError(f"tour needs at least 2 cities, got {n}")
        if sorted(order) != list(range(n)):
            raise InvalidInputError(f"tour is not a permutation of 0..{n - 1}: {order}")
        if order[0] != 0:
            k = order.index(0)
            order = order[k:] + order[:k]
        object.__setattr__(self, "order", order)

    def __len__(self) -> int:
        return len(self.order)

    def __iter__(self) -> Iterator[int]:
        return iter(self.order)

    def __getitem__(self, i: int) -> int:
        return self.order[i]

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Tour) and self.order == other.order

    def __hash__(self) -> int:
        return hash(self.order)

    def __repr__(self) -> str:
        return f"Tour{self.order}"

    def __setattr__(self, name: str, value: object) -> None:
        raise AttributeError("Tour is immutable")


@dataclass(frozen=True)
class EuclideanInstance:
    """n cities, each with one 2-D coordinate per objective.

    ``coords`` has shape (n, 2, 2): city index, objective index, x/y.
    """

    coords: np.ndarray

    def __post_init__(self) -> None:
        coords = np.array(self.coords, dtype=float)
        if coords.ndim != 3 or coords.shape[1:] != (2, 2):
            raise InvalidInputError(f"coords must have shape (n, 2, 2), got {coords.shape}")
        if coords.shape[0] < 2:
            raise InvalidInputError("instance needs n >= 2 cities")
        if not np.all(np.isfinite(coords)):
            raise InvalidInputError("coordinates must be finite")
        coords.setflags(write=False)
        object.__setattr__(self, "coords", coords)

    @property
    def n(self) -> int:
        return self.coords.shape[0]

    def distance_matrix(self, objective: int) -> np.ndarray:
        """Pairwise Euclidean distances for one objective (0 or 1)."""
        pts = self.coords[:, objective, :]
        diff = pts[:, None, :] - pts[None, :, :]
        return np.sqrt((diff * diff).sum(axis=2))


@dataclass(frozen=True)
class AdjacencyInstance:
    """n cities with a symmetric nonnegative cost matrix per objective."""

    a1: np.ndarray
    a2: np.ndarray

    def __post_init__(self) -> None:
        a1 = np.array(self.a1, dtype=float)
        a2 = np.array(self.a2, dtype=float)
        for name, a in (("a1", a1), ("a2", a2)):
            if a.ndim != 2 or a.shape[0] != a.shape[1]:
                raise InvalidInputError(f"{name} must be square, got shape {a.shape}")
            if a.shape[0] < 2:
                raise InvalidInputError("instance needs n >= 2 cities")
            if not np.all(np.isfinite(a)):
                raise InvalidInputError(f"{name} entries must be finite")
            if np.any(a < 0):
                raise InvalidInputError(f"{name} entries must be nonnegative")
            if np.any(np.diag(a) != 0):
                raise InvalidInputError(f"{name} must have a zero diagonal")
            if not np.array_equal(a, a.T):
                raise InvalidInputError(f"{name} must be symmetric")
        if a1.shape != a2.shape:
            raise InvalidInputError("a1 and a2 must have the same shape")
        a1.setflags(write=False)
        a2.setflags(write=False)
        object.__setattr__(self, "a1", a1)
        object.__setattr__(self, "a2", a2)

    @property
    def n(self) -> int:
        return self.a1.shape[0]

    def distance_matrix(self, objective: int) -> np.ndarray:
        return self.a1 if objective == 0 else self.a2


BTSPInstance = Union[EuclideanInstance, AdjacencyInstance]


def _check_length(tour: Tour, n: int) -> None:
    if len(tour) != n:
        raise InvalidInputError(f"tour has {len(tour)} cities but instance has {n}")


def evaluate_euclidean(tour: Tour, inst: EuclideanInstance) -> ObjectiveVector:
    """Closed-loop sum of pairwise Euclidean distances, per objective."""
    _check_length(tour, inst.n)
    idx = np.fromiter(tour, dtype=int, count=len(tour))
    totals = []
    for m in range(2):
        pts = inst.coords[idx, m, :]
        diff = np.diff(np.vstack([pts, pts[:1]]), axis=0)
        totals.append(float(np.sqrt((diff * diff).sum(axis=1)).sum()))
    return ObjectiveVector(totals[0], totals[1])


def evaluate_adjacency(tour: Tour, inst: AdjacencyInstance) -> ObjectiveVector:
    """Closed-loop sum of matrix edge weights, per objective."""
    _check_length(tour, inst.n)
    idx = np.fromiter(tour, dtype=int, count=len(tour))
    nxt = np.roll(idx, -1)
    return ObjectiveVector(float(inst.a1[idx, nxt].sum()), float(inst.a2[idx, nxt].sum()))


def evaluate(tour: Tour, inst: BTSPInstance) -> ObjectiveVector:
    """Dispatch on the instance kind."""
    if isinstance(inst, EuclideanInstance):
        return evaluate_euclidean(tour, inst)
    return evaluate_adjacency(tour, inst)


def nondominated_filter(points: Iterable[ObjectiveVector]) -> list[ObjectiveVector]:
    """Exactly the nondominated subset of ``points`` (duplicates kept).

    Sort-and-sweep: after sorting by (f1, f2), a point is dominated iff some
    earlier point has f2 <= its f2 (and is not an exact duplicate of it).
    """
    pts = list(points)
    if len(pts) <= 1:
        return pts
    order = sorted(range(len(pts)), key=lambda i: (pts[i].f1, pts[i].f2))
    keep = [False] * len(pts)
    best_f2 = math.inf
    prev_key = None
    for i in order:
        p = pts[i]
        key = (p.f1, p.f2)
        if p.f2 < best_f2 or key == prev_key:
            keep[i] = True
            if p.f2 < best_f2:
                best_f2 = p.f2
                prev_key = key
    return [p for i, p in enumerate(pts) if keep[i]]


@dataclass
class ParetoArchive:
    """Mutually nondominated (tour, objective) pairs with insertion-time pruning.

    Single-writer: concurrent producers should funnel candidates to one
    merging consumer. Objective duplicates keep the first-inserted tour.
    """

    _tours: list[Tour] = field(default_factory=list)
    _objectives: list[ObjectiveVector] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self._tours)

    def entries(self) -> list[tuple[Tour, ObjectiveVector]]:
        return list(zip(self._tours, self._objectives))

    def objectives(self) -> list[ObjectiveVector]:
        return list(self._objectives)

    def tours(self) -> list[Tour]:
        return list(self._tours)

    def would_accept(self, objective: ObjectiveVector) -> bool:
        """Cheap pre-check: would ``insert`` add this objective vector?"""
        for existing in self._objectives:
            if dominates(existing, objective):
                return False
            if existing.f1 == objective.f1 and existing.f2 == objective.f2:
                return False
        return True

    def insert(self, tour: Tour, objective: ObjectiveVector) -> bool:
        """Insert iff not dominated and not an objective duplicate.

        Members dominated by the new entry are removed. Returns True when
        the entry was added.
        """
        if not self.would_accept(objective):
            return False
        survivors_t, survivors_o = [], []
        for t, o in zip(self._tours, self._objectives):
            if not dominates(objective, o):
                survivors_t.append(t)
                survivors_o.append(o)
        survivors_t.append(tour)
        survivors_o.append(objective)
        self._tours = survivors_t
        self._objectives = survivors_o
        return True

    def merge(self, other: "ParetoArchive") -> None:
        for t, o in other.entries():
            self.insert(t, o)


def archive_insert(
    archive: ParetoArchive, entry: tuple[Tour, ObjectiveVector]
) -> ParetoArchive:
    """Functional wrapper around :meth:`ParetoArchive.insert`."""
    archive.insert(entry[0], entry[1])
    return archive
