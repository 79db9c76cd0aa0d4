"""Comparison algorithms: NSGA-II, MOEA/D, and weighted-sum scalarization.

NSGA-II uses fast nondominated sorting with crowding-distance selection;
MOEA/D decomposes into weighted-sum subproblems with neighborhood mating and
replacement -- the scalarization whose blindness to concave front regions
motivates the cone decomposition. Both use order crossover and inversion
mutation over permutations with city 0 pinned, and account every objective
evaluation against the configured budget.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import BTSPInstance, ObjectiveVector, ParetoArchive, Tour
from .errors import InvalidInputError
from .search import SearchConfig, minimize_weighted_sum

_INF = math.inf


@dataclass(frozen=True)
class EvoConfig:
    population: int = 100
    evaluations: int = 20_000
    crossover_rate: float = 0.9
    mutation_rate: float = 0.6
    neighborhood_T: int = 10
    seed: int = 0

    def __post_init__(self) -> None:
        if self.population < 4 or self.population % 2 != 0:
            raise InvalidInputError("population must be even and >= 4")
        if self.evaluations < self.population:
            raise InvalidInputError("evaluation budget must cover the initial population")
        for name in ("crossover_rate", "mutation_rate"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise InvalidInputError(f"{name} must be in [0, 1], got {v}")
        if self.neighborhood_T < 2:
            raise InvalidInputError("neighborhood_T must be >= 2")


class _Evaluator:
    """Budgeted tour evaluation over the two cost matrices."""

    def __init__(self, inst: BTSPInstance, budget: int):
        self.d1 = inst.distance_matrix(0)
        self.d2 = inst.distance_matrix(1)
        self.budget = budget
        self.count = 0

    def remaining(self) -> int:
        return self.budget - self.count

    def __call__(self, perm: np.ndarray) -> tuple[float, float]:
        """Evaluate a permutation of cities 1..n-1 (city 0 implicit first)."""
        if self.count >= self.budget:
            raise RuntimeError("evaluation budget exceeded")
        self.count += 1
        idx = np.concatenate(([0], perm))
        nxt = np.roll(idx, -1)
        return float(self.d1[idx, nxt].sum()), float(self.d2[idx, nxt].sum())


def _as_tour(perm: np.ndarray) -> Tour:
    return Tour([0] + [int(c) for c in perm])


def _ox(p1: np.ndarray, p2: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Order crossover: keep a slice of p1, fill the rest in p2's order."""
    m = len(p1)
    a, b = sorted(int(v) for v in rng.integers(0, m, size=2))
    child = np.empty(m, dtype=p1.dtype)
    child[a : b + 1] = p1[a : b + 1]
    used = set(int(c) for c in p1[a : b + 1])
    fill = [int(c) for c in np.roll(p2, -(b + 1)) if int(c) not in used]
    slots = list(range(b + 1, m)) + list(range(a))
    for slot, city in zip(slots, fill):
        child[slot] = city
    return child


def _inversion(perm: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    m = len(perm)
    i, j = sorted(int(v) for v in rng.integers(0, m, size=2))
    out = perm.copy()
    out[i : j + 1] = out[i : j + 1][::-1]
    return out


def _dominance_matrix(f: np.ndarray) -> np.ndarray:
    """dom[i, j] True iff individual i dominates individual j."""
    le = (f[:, None, :] <= f[None, :, :]).all(axis=2)
    lt = (f[:, None, :] < f[None, :, :]).any(axis=2)
    return le & lt


def fast_nondominated_sort(f: np.ndarray) -> list[np.ndarray]:
    """Indices grouped into fronts, best first."""
    dom = _dominance_matrix(f)
    n_dom = dom.sum(axis=0)
    fronts = []
    assigned = np.zeros(len(f), dtype=bool)
    current = np.flatnonzero(n_dom == 0)
    while len(current) > 0:
        fronts.append(current)
        assigned[current] = True
        n_dom = n_dom - dom[current].sum(axis=0)
        current = np.flatnonzero((n_dom == 0) & ~assigned)
    return fronts


def crowding_distance(f: np.ndarray) -> np.ndarray:
    """Crowding distance within one front; boundary points get +inf."""
    n = len(f)
    dist = np.zeros(n)
    if n <= 2:
        return np.full(n, _INF)
    for m in range(f.shape[1]):
        order = np.argsort(f[:, m], kind="stable")
        lo, hi = f[order[0], m], f[order[-1], m]
        dist[order[0]] = dist[order[-1]] = _INF
        if hi > lo:
            gaps = (f[order[2:], m] - f[order[:-2], m]) / (hi - lo)
            dist[order[1:-1]] += gaps
    return dist


def nsga2(inst: BTSPInstance, cfg: EvoConfig, stats: dict | None = None) -> ParetoArchive:
    """NSGA-II over canonical tours; returns the final population's
    nondominated set."""
    rng = np.random.default_rng(cfg.seed)
    n, pop_size = inst.n, cfg.population
    ev = _Evaluator(inst, cfg.evaluations)

    pop = [np.array([int(c) for c in rng.permutation(np.arange(1, n))]) for _ in range(pop_size)]
    fvals = np.array([ev(p) for p in pop])
    generations = 0

    while ev.remaining() > 0:
        ranks, crowd = _rank_and_crowd(fvals)
        children = []
        child_f = []
        for _ in range(min(pop_size, ev.remaining())):
            i1 = _tournament(ranks, crowd, rng)
            i2 = _tournament(ranks, crowd, rng)
            if rng.random() < cfg.crossover_rate:
                child = _ox(pop[i1], pop[i2], rng)
            else:
                child = pop[i1].copy()
            if rng.random() < cfg.mutation_rate:
                child = _inversion(child, rng)
            children.append(child)
            child_f.append(ev(child))
        combined = pop + children
        combined_f = np.vstack([fvals, np.array(child_f)])
        keep = _environmental_selection(combined_f, pop_size)
        pop = [combined[i] for i in keep]
        fvals = combined_f[keep]
        generations += 1

    archive = ParetoArchive()
    for perm, (f1, f2) in zip(pop, fvals):
        archive.insert(_as_tour(perm), ObjectiveVector(f1, f2))
    if stats is not None:
        stats.update(evaluations=ev.count, generations=generations)
    return archive


def _rank_and_crowd(f: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    ranks = np.zeros(len(f), dtype=int)
    crowd = np.zeros(len(f))
    for r, front in enumerate(fast_nondominated_sort(f)):
        ranks[front] = r
        crowd[front] = crowding_distance(f[front])
    return ranks, crowd


def _tournament(ranks: np.ndarray, crowd: np.ndarray, rng: np.random.Generator) -> int:
    i, j = (int(v) for v in rng.integers(0, len(ranks), size=2))
    if ranks[i] != ranks[j]:
        return i if ranks[i] < ranks[j] else j
    if crowd[i] != crowd[j]:
        return i if crowd[i] > crowd[j] else j
    return i


def _environmental_selection(f: np.ndarray, pop_size: int) -> list[int]:
    keep: list[int] = []
    for front in fast_nondominated_sort(f):
        if len(keep) + len(front) <= pop_size:
            keep.extend(int(i) for i in front)
            continue
        crowd = crowding_distance(f[front])
        order = np.argsort(-crowd, kind="stable")
        keep.extend(int(front[i]) for i in order[: pop_size - len(keep)])
        break
    return keep


def moead(
    inst: BTSPInstance, cfg: EvoConfig, K: int, stats: dict | None = None
) -> ParetoArchive:
    """MOEA/D with weighted-sum decomposition; archives every nondominated
    evaluation."""
    if K < 2:
        raise InvalidInputError(f"MOEA/D needs K >= 2 subproblems, got {K}")
    if cfg.evaluations < K:
        raise InvalidInputError("evaluation budget must cover the K subproblem seeds")
    rng = np.random.default_rng(cfg.seed)
    n = inst.n
    ev = _Evaluator(inst, cfg.evaluations)
    weights = np.array([[i / (K - 1), 1.0 - i / (K - 1)] for i in range(K)])
    wdist = np.abs(weights[:, None, 0] - weights[None, :, 0])
    t = min(cfg.neighborhood_T, K)
    neighbors = [np.argsort(wdist[i], kind="stable")[:t] for i in range(K)]

    archive = ParetoArchive()
    pop = []
    fvals = np.zeros((K, 2))
    for i in range(K):
        perm = np.array([int(c) for c in rng.permutation(np.arange(1, n))])
        pop.append(perm)
        fvals[i] = ev(perm)
        archive.insert(_as_tour(perm), ObjectiveVector(*fvals[i]))
    generations = 0

    while ev.remaining() > 0:
        for i in range(K):
            if ev.remaining() <= 0:
                break
            nb = neighbors[i]
            r1, r2 = (int(nb[int(v)]) for v in rng.integers(0, len(nb), size=2))
            if rng.random() < cfg.crossover_rate:
                child = _ox(pop[r1], pop[r2], rng)
            else:
                child = pop[r1].copy()
            if rng.random() < cfg.mutation_rate:
                child = _inversion(child, rng)
            cf = ev(child)
            archive.insert(_as_tour(child), ObjectiveVector(*cf))
            for j in nb:
                if weights[j] @ cf < weights[j] @ fvals[j]:
                    pop[j] = child
                    fvals[j] = cf
        generations += 1

    if stats is not None:
        stats.update(evaluations=ev.count, generations=generations)
    return archive


def weighted_sum(
    inst: BTSPInstance,
    alphas: list[tuple[float, float]],
    cfg: SearchConfig = SearchConfig(),
) -> ParetoArchive:
    """Linear scalarization baseline: one local search per convex weight pair."""
    for a in alphas:
        if len(a) != 2 or min(a) < 0 or abs(a[0] + a[1] - 1.0) > 1e-9:
            raise InvalidInputError(f"weights must be convex pairs, got {a}")
    archive = ParetoArchive()
    for idx, (a1, a2) in enumerate(alphas):
        rng = np.random.default_rng((cfg.seed, idx))
        tour, F = minimize_weighted_sum(inst, a1, a2, cfg, rng)
        archive.insert(tour, F)
    return archive


def uniform_weights(count: int) -> list[tuple[float, float]]:
    """Uniform convex weight grid including both extremes."""
    if count < 1:
        raise InvalidInputError("need at least one weight")
    if count == 1:
        return [(0.5, 0.5)]
    return [(i / (count - 1), 1.0 - i / (count - 1)) for i in range(count)]
