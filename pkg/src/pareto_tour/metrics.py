"""Front-quality evaluation: hypervolume and run reporting.

Hypervolume is the fraction of the box [0, r1] x [0, r2] dominated by the
archive, reported as a percentage. The Monte-Carlo estimator mirrors the
evaluation protocol used for all solvers; the exact sweep is its oracle.
The sampling box is anchored at the origin since tour costs are strictly
positive.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np

from .core import ObjectiveVector, ParetoArchive, nondominated_filter
from .errors import InvalidInputError

CSV_HEADER = ["algo", "instance", "seed", "hv_pct", "archive_size", "wall_s"]


@dataclass(frozen=True)
class ReferencePoint:
    """Upper corner of the hypervolume box; must exceed the points it scores."""

    r1: float
    r2: float

    def __post_init__(self) -> None:
        if not (self.r1 > 0 and self.r2 > 0):
            raise InvalidInputError(f"reference point must be positive, got {self}")


def reference_point(n: int) -> ReferencePoint:
    """Default reference rule: n cities -> (n, n)."""
    if n < 1:
        raise InvalidInputError(f"need n >= 1, got {n}")
    return ReferencePoint(float(n), float(n))


Points = ParetoArchive | Iterable[ObjectiveVector]


def _as_points(archive: Points) -> list[ObjectiveVector]:
    if isinstance(archive, ParetoArchive):
        return archive.objectives()
    return list(archive)


def clip_to_box(points: Iterable[ObjectiveVector], ref: ReferencePoint) -> tuple[list[ObjectiveVector], int]:
    """Drop points with any coordinate >= the reference; return (kept, n_dropped)."""
    pts = list(points)
    kept = [p for p in pts if p.f1 < ref.r1 and p.f2 < ref.r2]
    return kept, len(pts) - len(kept)


def _staircase(archive: Points, ref: ReferencePoint) -> tuple[np.ndarray, np.ndarray, int]:
    """Nondominated in-box points sorted by ascending f1 (so f2 descends)."""
    pts, clipped = clip_to_box(_as_points(archive), ref)
    front = sorted(set((p.f1, p.f2) for p in nondominated_filter(pts)))
    xs = np.array([p[0] for p in front])
    ys = np.array([p[1] for p in front])
    return xs, ys, clipped


def hv_exact_2d(archive: Points, ref: ReferencePoint) -> float:
    """Exact dominated-area percentage via sort-and-sweep rectangles."""
    xs, ys, _ = _staircase(archive, ref)
    if len(xs) == 0:
        return 0.0
    right = np.append(xs[1:], ref.r1)
    area = float(((right - xs) * (ref.r2 - ys)).sum())
    return 100.0 * area / (ref.r1 * ref.r2)


def hv_monte_carlo(
    archive: Points,
    ref: ReferencePoint,
    samples: int = 1_000_000,
    seed: int = 0,
    workers: int = 1,
) -> float:
    """Monte-Carlo hypervolume: percentage of uniform box samples dominated
    by at least one archive point.

    The sample budget is split across ``workers`` substreams; the result is
    deterministic for a fixed (seed, workers) pair regardless of scheduling.
    """
    if samples < 1:
        raise InvalidInputError(f"need samples >= 1, got {samples}")
    if workers < 1:
        raise InvalidInputError(f"need workers >= 1, got {workers}")
    xs, ys, _ = _staircase(archive, ref)
    if len(xs) == 0:
        return 0.0
    # ys is strictly decreasing along the staircase; prefix-min for safety.
    ymin = np.minimum.accumulate(ys)
    hits = 0
    base = samples // workers
    for w in range(workers):
        count = base + (1 if w < samples % workers else 0)
        if count == 0:
            continue
        rng = np.random.default_rng((int(seed), w))
        sx = rng.random(count) * ref.r1
        sy = rng.random(count) * ref.r2
        idx = np.searchsorted(xs, sx, side="right")
        inside = idx > 0
        hits += int((ymin[idx[inside] - 1] <= sy[inside]).sum())
    return 100.0 * hits / samples


@dataclass
class RunReport:
    """One solver run: identity, quality, and cost."""

    algo: str
    instance: str
    seed: int
    hv_pct: float
    archive_size: int
    wall_s: float
    config: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not (0.0 <= self.hv_pct <= 100.0):
            raise InvalidInputError(f"hv_pct must be in [0, 100], got {self.hv_pct}")

    def csv_row(self) -> list:
        return [self.algo, self.instance, self.seed, f"{self.hv_pct:.4f}",
                self.archive_size, f"{self.wall_s:.4f}"]

    def to_json(self) -> str:
        return json.dumps(
            {
                "algo": self.algo,
                "instance": self.instance,
                "seed": self.seed,
                "hv_pct": self.hv_pct,
                "archive_size": self.archive_size,
                "wall_s": self.wall_s,
                "config": self.config,
            },
            sort_keys=True,
        )


def append_report(path: str | Path, report: RunReport) -> None:
    """Append one CSV row (plus a JSON-lines sidecar), writing headers once."""
    path = Path(path)
    new_file = not path.exists() or path.stat().st_size == 0
    with path.open("a", newline="") as fh:
        writer = csv.writer(fh)
        if new_file:
            writer.writerow(CSV_HEADER)
        writer.writerow(report.csv_row())
    with path.with_suffix(".jsonl").open("a") as fh:
        fh.write(report.to_json() + "\n")


def read_report(path: str | Path) -> list[dict]:
    with Path(path).open(newline="") as fh:
        return list(csv.DictReader(fh))
