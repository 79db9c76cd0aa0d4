"""Concave-front demonstration problem.

Two smooth objectives on the box [-1, 1]^2 whose Pareto front is concave:
    f1(x) = 1 - exp(-sum_i (x_i - 1/sqrt(2))^2)
    f2(x) = 1 - exp(-sum_i (x_i + 1/sqrt(2))^2)
The cone decomposition recovers the whole front, one solution per preference,
while linear scalarization collapses onto the two endpoints -- the textbook
failure mode this package's decomposition avoids.

Both solvers are projected gradient descent with deterministic grid
multistarts; the cone solver wraps the constraint in a quadratic penalty with
a doubling schedule.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import ObjectiveVector
from .decomposition import PreferenceSet, PreferenceVector, cone_constraint
from .errors import DivergenceError, InvalidInputError

_C = 1.0 / math.sqrt(2.0)
DOMAIN_LO, DOMAIN_HI = -1.0, 1.0


@dataclass(frozen=True)
class ConcaveConfig:
    mu0: float = 1.0
    doublings: int = 12
    iters_per_stage: int = 1500
    grid_starts: int = 4  # per axis: grid_starts**2 multistarts
    epsilon_g: float = 1e-3
    gtol: float = 1e-6  # projected-gradient stationarity tolerance

    def __post_init__(self) -> None:
        if self.mu0 <= 0 or self.doublings < 0 or self.iters_per_stage < 1:
            raise InvalidInputError("invalid penalty schedule")
        if self.grid_starts < 2:
            raise InvalidInputError("need at least a 2x2 start grid")


def eval_concave(x: tuple[float, float] | np.ndarray) -> ObjectiveVector:
    """Objective pair at one decision point; rejects out-of-domain input."""
    x = np.asarray(x, dtype=float)
    if x.shape != (2,):
        raise InvalidInputError(f"decision point must have 2 components, got shape {x.shape}")
    if np.any(x < DOMAIN_LO) or np.any(x > DOMAIN_HI):
        raise InvalidInputError(f"point {x} outside [{DOMAIN_LO}, {DOMAIN_HI}]^2")
    f1, f2 = _objectives(x[None, :])
    return ObjectiveVector(float(f1[0]), float(f2[0]))


def _objectives(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized (f1, f2) for x of shape (m, 2)."""
    u1 = ((x - _C) ** 2).sum(axis=1)
    u2 = ((x + _C) ** 2).sum(axis=1)
    return 1.0 - np.exp(-u1), 1.0 - np.exp(-u2)


def _objectives_grad(x: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """f1, f2 and their gradients (each (m, 2)) at x of shape (m, 2)."""
    e1 = np.exp(-((x - _C) ** 2).sum(axis=1))
    e2 = np.exp(-((x + _C) ** 2).sum(axis=1))
    g1 = 2.0 * (x - _C) * e1[:, None]
    g2 = 2.0 * (x + _C) * e2[:, None]
    return 1.0 - e1, 1.0 - e2, g1, g2


def _start_grid(per_axis: int) -> np.ndarray:
    axis = np.linspace(DOMAIN_LO, DOMAIN_HI, per_axis)
    xx, yy = np.meshgrid(axis, axis)
    return np.column_stack([xx.ravel(), yy.ravel()])


def _penalty_grad(
    x: np.ndarray, w: np.ndarray, mu: float
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Value pieces and gradient of ||F|| + mu * max(0, g)^2, rows matched to w."""
    f1, f2, g1, g2 = _objectives_grad(x)
    norm = np.hypot(f1, f2)
    # norm > 0 everywhere: the two exponential bumps cannot both vanish.
    dnorm = (f1[:, None] * g1 + f2[:, None] * g2) / norm[:, None]
    wf = w[:, 0] * f1 + w[:, 1] * f2
    g = 1.0 - wf / norm
    dwf = w[:, 0:1] * g1 + w[:, 1:2] * g2
    dg = -(dwf / norm[:, None] - (wf / norm**3)[:, None] * dnorm)
    active = np.maximum(g, 0.0)
    grad = dnorm + (2.0 * mu) * active[:, None] * dg
    return norm, g, grad


def _project(x: np.ndarray) -> np.ndarray:
    return np.clip(x, DOMAIN_LO, DOMAIN_HI)


def solve_concave_preference(
    w: PreferenceVector, cfg: ConcaveConfig = ConcaveConfig()
) -> tuple[np.ndarray, ObjectiveVector]:
    """Cone-constrained minimum-norm solve for one preference."""
    points, objectives = solve_concave_front(PreferenceSet([w]), cfg)
    return points[0], objectives[0]


def solve_concave_front(
    prefs: PreferenceSet, cfg: ConcaveConfig = ConcaveConfig()
) -> tuple[list[np.ndarray], list[ObjectiveVector]]:
    """Penalty-method solves for every preference, batched into one PGD run.

    Rows are (preference x start) pairs sharing each descent step; the best
    feasible start per preference wins. Fails with a diagnostic if any
    preference ends infeasible (g > epsilon) or non-stationary.
    """
    starts = _start_grid(cfg.grid_starts)
    n_starts = len(starts)
    k = len(prefs)
    w = np.repeat(np.array([[p.w1, p.w2] for p in prefs]), n_starts, axis=0)
    x = np.tile(starts, (k, 1))

    mu = cfg.mu0
    for _ in range(cfg.doublings + 1):
        eta = 0.1 / mu
        for _ in range(cfg.iters_per_stage):
            _, _, grad = _penalty_grad(x, w, mu)
            new_x = _project(x - eta * grad)
            step = np.abs(new_x - x).max()
            x = new_x
            if step <= eta * cfg.gtol:
                break
        mu *= 2.0
    mu /= 2.0  # final stage's value

    norm, g, grad = _penalty_grad(x, w, mu)
    proj_residual = np.abs(_project(x - grad) - x).max(axis=1)
    points: list[np.ndarray] = []
    objectives: list[ObjectiveVector] = []
    for i, pref in enumerate(prefs):
        rows = slice(i * n_starts, (i + 1) * n_starts)
        feasible = np.flatnonzero(
            (g[rows] <= cfg.epsilon_g) & (proj_residual[rows] <= cfg.gtol)
        )
        if len(feasible) == 0:
            raise DivergenceError(
                f"no feasible stationary solution for preference at "
                f"{math.degrees(pref.angle):.2f} deg (min g = {g[rows].min():.2e})"
            )
        best = feasible[np.argmin(norm[rows][feasible])]
        xi = x.reshape(k, n_starts, 2)[i, best]
        points.append(xi)
        objectives.append(eval_concave(xi))
    return points, objectives


def linear_scalarization_concave(
    alpha: tuple[float, float], cfg: ConcaveConfig = ConcaveConfig()
) -> tuple[np.ndarray, ObjectiveVector]:
    """Gradient-descent minimum of alpha1*f1 + alpha2*f2 with multistart."""
    points, objectives = linear_scalarization_sweep([alpha], cfg)
    return points[0], objectives[0]


def linear_scalarization_sweep(
    alphas: list[tuple[float, float]], cfg: ConcaveConfig = ConcaveConfig()
) -> tuple[list[np.ndarray], list[ObjectiveVector]]:
    """Batched scalarization solves, one per convex weight pair."""
    for a in alphas:
        if len(a) != 2 or min(a) < 0 or abs(a[0] + a[1] - 1.0) > 1e-9:
            raise InvalidInputError(f"weights must be convex pairs, got {a}")
    starts = _start_grid(cfg.grid_starts)
    n_starts = len(starts)
    k = len(alphas)
    a = np.repeat(np.asarray(alphas, dtype=float), n_starts, axis=0)
    x = np.tile(starts, (k, 1))

    eta = 0.05
    for _ in range(cfg.iters_per_stage * 4):
        f1, f2, g1, g2 = _objectives_grad(x)
        grad = a[:, 0:1] * g1 + a[:, 1:2] * g2
        new_x = _project(x - eta * grad)
        step = np.abs(new_x - x).max()
        x = new_x
        if step <= eta * cfg.gtol:
            break

    f1, f2, _, _ = _objectives_grad(x)
    value = a[:, 0] * f1 + a[:, 1] * f2
    points: list[np.ndarray] = []
    objectives: list[ObjectiveVector] = []
    for i in range(k):
        rows = slice(i * n_starts, (i + 1) * n_starts)
        best = int(np.argmin(value[rows]))
        xi = x.reshape(k, n_starts, 2)[i, best]
        points.append(xi)
        objectives.append(eval_concave(xi))
    return points, objectives


def count_distinct(points: list[ObjectiveVector], min_dist: float) -> int:
    """Greedy count of representatives pairwise farther apart than min_dist."""
    reps: list[tuple[float, float]] = []
    for p in sorted(points, key=lambda q: (q.f1, q.f2)):
        if all(math.hypot(p.f1 - r[0], p.f2 - r[1]) > min_dist for r in reps):
            reps.append((p.f1, p.f2))
    return len(reps)


def count_clusters(points: list[ObjectiveVector], radius: float) -> int:
    """Greedy cluster count: a point joins the first center within radius."""
    centers: list[tuple[float, float]] = []
    for p in sorted(points, key=lambda q: (q.f1, q.f2)):
        if all(math.hypot(p.f1 - c[0], p.f2 - c[1]) > radius for c in centers):
            centers.append((p.f1, p.f2))
    return len(centers)


def cone_gap(F: ObjectiveVector, w: PreferenceVector) -> float:
    """Recomputed cone constraint for reporting."""
    return cone_constraint(F, w)
