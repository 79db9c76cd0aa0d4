"""Instance generation, the grid-map coverage pipeline, and instance file I/O.

Generators are pure functions of (parameters, seed). The coverage pipeline
builds the first cost matrix from A* path lengths on a synthetic occupancy
grid and the second from Euclidean distances between random unit-square
points, mirroring a planner that optimizes travelled distance against an
independent priority metric.
"""
from __future__ import annotations

import heapq
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .core import AdjacencyInstance, BTSPInstance, EuclideanInstance
from .errors import InfeasibleInstanceError, InvalidInputError

SCHEMA_VERSION = 1

Cell = tuple[int, int]


@dataclass(frozen=True)
class GridMap:
    """Occupancy grid; True marks an obstacle. Indexed as (row, col)."""

    occupancy: np.ndarray

    def __post_init__(self) -> None:
        occ = np.array(self.occupancy, dtype=bool)
        if occ.ndim != 2 or occ.shape[0] < 1 or occ.shape[1] < 1:
            raise InvalidInputError(f"occupancy must be a 2-D grid, got shape {occ.shape}")
        if bool(occ.all()):
            raise InvalidInputError("grid map must contain at least one free cell")
        occ.setflags(write=False)
        object.__setattr__(self, "occupancy", occ)

    @property
    def height(self) -> int:
        return self.occupancy.shape[0]

    @property
    def width(self) -> int:
        return self.occupancy.shape[1]

    def is_free(self, cell: Cell) -> bool:
        r, c = cell
        return 0 <= r < self.height and 0 <= c < self.width and not self.occupancy[r, c]

    def free_cells(self) -> list[Cell]:
        """All free cells in row-major order."""
        rows, cols = np.nonzero(~self.occupancy)
        return [(int(r), int(c)) for r, c in zip(rows, cols)]

    def to_dict(self) -> dict:
        rows, cols = np.nonzero(self.occupancy)
        return {
            "width": self.width,
            "height": self.height,
            "obstacles": [[int(r), int(c)] for r, c in zip(rows, cols)],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GridMap":
        occ = np.zeros((int(data["height"]), int(data["width"])), dtype=bool)
        for r, c in data.get("obstacles", []):
            occ[int(r), int(c)] = True
        return cls(occ)


@dataclass(frozen=True)
class NodeFeatures:
    """Per-city statistics of neighbouring edge weights: sum, min, max."""

    sum_w: np.ndarray
    min_w: np.ndarray
    max_w: np.ndarray


def _rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng((int(seed),) + tuple(int(k) for k in key))


def gen_euclidean(n: int, seed: int) -> EuclideanInstance:
    """n cities with 4 independent uniform-[0,1) coordinates each."""
    if n < 2:
        raise InvalidInputError(f"need n >= 2 cities, got {n}")
    return EuclideanInstance(_rng(seed).random((n, 2, 2)))


def _free_component_size(occ: np.ndarray) -> int:
    """Size of the 4-connected free component containing the first free cell."""
    free = ~occ
    rows, cols = np.nonzero(free)
    if len(rows) == 0:
        return 0
    seen = np.zeros_like(free)
    stack = [(int(rows[0]), int(cols[0]))]
    seen[stack[0]] = True
    count = 0
    h, w = occ.shape
    while stack:
        r, c = stack.pop()
        count += 1
        for nr, nc in ((r + 1, c), (r - 1, c), (r, c + 1), (r, c - 1)):
            if 0 <= nr < h and 0 <= nc < w and free[nr, nc] and not seen[nr, nc]:
                seen[nr, nc] = True
                stack.append((nr, nc))
    return count


def gen_gridmap(
    width: int, height: int, obstacle_density: float, seed: int, max_attempts: int = 1000
) -> GridMap:
    """Random occupancy grid whose free space forms one 4-connected component.

    Each cell is an obstacle with probability ``obstacle_density``; draws are
    repeated until the free space is connected.
    """
    if width < 5 or height < 5:
        raise InvalidInputError(f"grid must be at least 5x5, got {width}x{height}")
    if not (0.0 <= obstacle_density < 1.0):
        raise InvalidInputError(f"obstacle density must be in [0, 1), got {obstacle_density}")
    rng = _rng(seed)
    for _ in range(max_attempts):
        occ = rng.random((height, width)) < obstacle_density
        n_free = int((~occ).sum())
        if n_free > 0 and _free_component_size(occ) == n_free:
            return GridMap(occ)
    raise InfeasibleInstanceError(
        f"no connected {width}x{height} map at density {obstacle_density} "
        f"within {max_attempts} attempts"
    )


def sample_poi(grid: GridMap, n: int, seed: int) -> list[Cell]:
    """n distinct free cells, uniform without replacement."""
    free = grid.free_cells()
    if n > len(free):
        raise InvalidInputError(f"requested {n} points but map has {len(free)} free cells")
    idx = _rng(seed).choice(len(free), size=n, replace=False)
    return [free[i] for i in idx]


def _astar_length(grid: GridMap, start: Cell, goal: Cell) -> float:
    """Length of a shortest 4-connected unit-cost path, by A* with the
    Manhattan heuristic."""
    if start == goal:
        return 0.0
    h0 = abs(start[0] - goal[0]) + abs(start[1] - goal[1])
    open_heap: list[tuple[int, Cell]] = [(h0, start)]
    g_cost = {start: 0}
    closed: set[Cell] = set()
    while open_heap:
        _, cur = heapq.heappop(open_heap)
        if cur == goal:
            return float(g_cost[cur])
        if cur in closed:
            continue
        closed.add(cur)
        r, c = cur
        ng = g_cost[cur] + 1
        for nxt in ((r + 1, c), (r - 1, c), (r, c + 1), (r, c - 1)):
            if not grid.is_free(nxt) or ng >= g_cost.get(nxt, 1 << 30):
                continue
            g_cost[nxt] = ng
            h = abs(nxt[0] - goal[0]) + abs(nxt[1] - goal[1])
            heapq.heappush(open_heap, (ng + h, nxt))
    raise InfeasibleInstanceError(f"no path between {start} and {goal}")


def apsp_astar(grid: GridMap, points: Sequence[Cell]) -> np.ndarray:
    """All-pairs shortest-path lengths between ``points``, one A* per pair.

    Symmetric with a zero diagonal; unreachable pairs raise
    InfeasibleInstanceError.
    """
    for p in points:
        if not grid.is_free(tuple(p)):
            raise InvalidInputError(f"point {p} is not a free cell")
    n = len(points)
    a1 = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            d = _astar_length(grid, tuple(points[i]), tuple(points[j]))
            a1[i, j] = a1[j, i] = d
    return a1


def gen_second_adjacency(n: int, seed: int) -> np.ndarray:
    """Euclidean distance matrix of n random points in the unit square."""
    if n < 2:
        raise InvalidInputError(f"need n >= 2 points, got {n}")
    pts = _rng(seed).random((n, 2))
    diff = pts[:, None, :] - pts[None, :, :]
    return np.sqrt((diff * diff).sum(axis=2))


def gen_coverage(
    width: int, height: int, obstacle_density: float, n: int, seed: int
) -> AdjacencyInstance:
    """Full coverage-planning pipeline: map -> POIs -> A* matrix + random metric.

    Sub-stages draw from seed-derived substreams so each stage is
    independently reproducible.
    """
    grid = gen_gridmap(width, height, obstacle_density, seed)
    points = sample_poi(grid, n, seed + 1)
    a1 = apsp_astar(grid, points)
    a2 = gen_second_adjacency(n, seed + 2)
    return AdjacencyInstance(a1, a2)


def node_features(a: np.ndarray) -> NodeFeatures:
    """Sum, min, and max of each city's off-diagonal row entries."""
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    if a.ndim != 2 or a.shape[1] != n:
        raise InvalidInputError(f"adjacency must be square, got shape {a.shape}")
    if n < 2:
        raise InvalidInputError("need n >= 2 cities")
    off = ~np.eye(n, dtype=bool)
    rows = a[off].reshape(n, n - 1)
    return NodeFeatures(rows.sum(axis=1), rows.min(axis=1), rows.max(axis=1))


def instance_to_dict(inst: BTSPInstance, seed: int = 0, meta: dict | None = None) -> dict:
    meta = dict(meta or {})
    meta.setdefault("schema_version", SCHEMA_VERSION)
    data: dict = {"n": inst.n, "seed": int(seed), "meta": meta}
    if isinstance(inst, EuclideanInstance):
        data["kind"] = "euclidean"
        data["coords"] = inst.coords.reshape(inst.n, 4).tolist()
    else:
        data["kind"] = "adjacency"
        data["a1"] = inst.a1.tolist()
        data["a2"] = inst.a2.tolist()
    return data


def instance_from_dict(data: dict) -> BTSPInstance:
    try:
        kind = data["kind"]
        n = int(data["n"])
        version = int(data.get("meta", {}).get("schema_version", SCHEMA_VERSION))
        if version > SCHEMA_VERSION:
            raise InvalidInputError(
                f"instance schema_version {version} is newer than supported {SCHEMA_VERSION}"
            )
        if kind == "euclidean":
            coords = np.asarray(data["coords"], dtype=float)
            if coords.shape != (n, 4):
                raise InvalidInputError(f"coords must have shape ({n}, 4), got {coords.shape}")
            return EuclideanInstance(coords.reshape(n, 2, 2))
        if kind == "adjacency":
            return AdjacencyInstance(np.asarray(data["a1"]), np.asarray(data["a2"]))
    except KeyError as exc:
        raise InvalidInputError(f"instance file missing key: {exc}") from exc
    raise InvalidInputError(f"unknown instance kind {kind!r}")


def save_instance(path: str | Path, inst: BTSPInstance, seed: int = 0, meta: dict | None = None) -> None:
    Path(path).write_text(
        json.dumps(instance_to_dict(inst, seed, meta), sort_keys=True, separators=(",", ":"))
        + "\n"
    )


def load_instance(path: str | Path) -> BTSPInstance:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"{path}: not valid JSON ({exc})") from exc
    return instance_from_dict(data)
