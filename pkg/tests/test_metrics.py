import csv
import json

import numpy as np
import pytest

from pareto_tour.core import ObjectiveVector, ParetoArchive, Tour
from pareto_tour.errors import InvalidInputError
from pareto_tour.metrics import (
    ReferencePoint,
    RunReport,
    append_report,
    clip_to_box,
    hv_exact_2d,
    hv_monte_carlo,
    read_report,
    reference_point,
)

from oracles import hv_percent_by_grid


def vecs(*pairs):
    return [ObjectiveVector(a, b) for a, b in pairs]


class TestReferencePoint:
    def test_paper_rule_200_cities(self):
        ref = reference_point(200)
        assert (ref.r1, ref.r2) == (200.0, 200.0)

    def test_small_values(self):
        assert (reference_point(1).r1, reference_point(1).r2) == (1.0, 1.0)
        assert (reference_point(40).r1, reference_point(40).r2) == (40.0, 40.0)

    def test_invalid(self):
        with pytest.raises(InvalidInputError):
            reference_point(0)
        with pytest.raises(InvalidInputError):
            ReferencePoint(0.0, 1.0)


class TestExactHV:
    def test_single_rectangle(self):
        assert hv_exact_2d(vecs((1, 1)), ReferencePoint(2, 2)) == pytest.approx(25.0)

    def test_three_point_staircase(self):
        # (3 + 2 + 1) / 16 of the box
        pts = vecs((1, 3), (2, 2), (3, 1))
        assert hv_exact_2d(pts, ReferencePoint(4, 4)) == pytest.approx(37.5)

    def test_dominated_point_contributes_nothing(self):
        pts = vecs((1, 3), (2, 2), (3, 1))
        more = pts + vecs((2.5, 2.5), (3, 3))
        ref = ReferencePoint(4, 4)
        assert hv_exact_2d(more, ref) == hv_exact_2d(pts, ref)

    def test_empty_archive_zero(self):
        assert hv_exact_2d([], ReferencePoint(4, 4)) == 0.0
        assert hv_monte_carlo([], ReferencePoint(4, 4), samples=10) == 0.0

    def test_points_outside_ref_clipped(self):
        pts = vecs((1, 1), (5, 0.5), (0.5, 5))
        kept, clipped = clip_to_box(pts, ReferencePoint(2, 2))
        assert clipped == 2 and len(kept) == 1
        assert hv_exact_2d(pts, ReferencePoint(2, 2)) == pytest.approx(25.0)

    def test_monotone_under_point_addition(self):
        rng = np.random.default_rng(14)
        ref = ReferencePoint(1, 1)
        pts = []
        prev = 0.0
        for _ in range(60):
            pts.append(ObjectiveVector(*rng.random(2)))
            cur = hv_exact_2d(pts, ref)
            assert cur >= prev - 1e-12
            prev = cur

    def test_scale_consistency(self):
        rng = np.random.default_rng(15)
        pts = vecs(*(tuple(p) for p in rng.random((20, 2))))
        base = hv_exact_2d(pts, ReferencePoint(1.5, 1.5))
        for c in (0.01, 3.0, 1e4):
            scaled = vecs(*((p.f1 * c, p.f2 * c) for p in pts))
            assert hv_exact_2d(scaled, ReferencePoint(1.5 * c, 1.5 * c)) == pytest.approx(
                base, abs=1e-9
            )

    def test_archive_order_invariance(self):
        rng = np.random.default_rng(16)
        pts = vecs(*(tuple(p) for p in rng.random((30, 2))))
        ref = ReferencePoint(1.2, 1.2)
        base = hv_exact_2d(pts, ref)
        for seed in range(4):
            perm = np.random.default_rng(seed).permutation(len(pts))
            assert hv_exact_2d([pts[i] for i in perm], ref) == pytest.approx(base, abs=1e-12)

    def test_matches_independent_grid_approximation(self):
        rng = np.random.default_rng(23)
        pts = [tuple(p) for p in rng.random((15, 2))]
        exact = hv_exact_2d(vecs(*pts), ReferencePoint(1, 1))
        grid = hv_percent_by_grid(pts, 1.0, 1.0, cells=2000)
        assert exact == pytest.approx(grid, abs=0.1)

    def test_accepts_archive_object(self):
        archive = ParetoArchive()
        archive.insert(Tour([0, 1]), ObjectiveVector(1, 1))
        assert hv_exact_2d(archive, ReferencePoint(2, 2)) == pytest.approx(25.0)


class TestMonteCarloHV:
    def test_quarter_box(self):
        mc = hv_monte_carlo(vecs((1, 1)), ReferencePoint(2, 2), samples=200_000, seed=1)
        assert mc == pytest.approx(25.0, abs=0.5)

    def test_against_exact_within_binomial_bound(self):
        rng = np.random.default_rng(20)
        samples = 100_000
        for trial in range(20):
            m = int(rng.integers(1, 25))
            pts = vecs(*(tuple(p) for p in rng.random((m, 2))))
            ref = ReferencePoint(1.0, 1.0)
            exact = hv_exact_2d(pts, ref)
            mc = hv_monte_carlo(pts, ref, samples=samples, seed=trial)
            p = exact / 100.0
            sigma_pct = 100.0 * np.sqrt(max(p * (1 - p), 1e-12) / samples)
            assert abs(mc - exact) <= max(3 * sigma_pct, 1e-6)

    def test_deterministic_per_seed_and_workers(self):
        pts = vecs((0.3, 0.7), (0.5, 0.4), (0.8, 0.2))
        ref = ReferencePoint(1, 1)
        a = hv_monte_carlo(pts, ref, samples=50_000, seed=5, workers=3)
        b = hv_monte_carlo(pts, ref, samples=50_000, seed=5, workers=3)
        assert a == b
        c = hv_monte_carlo(pts, ref, samples=50_000, seed=6, workers=3)
        assert a != c

    def test_error_shrinks_with_sample_count(self):
        # Quadrupling samples should roughly halve the error; compare RMS
        # error across repeated trials at 1x and 4x.
        pts = vecs((0.2, 0.8), (0.4, 0.5), (0.7, 0.3))
        ref = ReferencePoint(1, 1)
        exact = hv_exact_2d(pts, ref)
        err1 = [hv_monte_carlo(pts, ref, 4_000, seed=s) - exact for s in range(30)]
        err4 = [hv_monte_carlo(pts, ref, 16_000, seed=s + 1000) - exact for s in range(30)]
        rms1 = np.sqrt(np.mean(np.square(err1)))
        rms4 = np.sqrt(np.mean(np.square(err4)))
        assert rms4 <= 0.75 * rms1

    def test_invalid_inputs(self):
        with pytest.raises(InvalidInputError):
            hv_monte_carlo(vecs((1, 1)), ReferencePoint(2, 2), samples=0)
        with pytest.raises(InvalidInputError):
            hv_monte_carlo(vecs((1, 1)), ReferencePoint(2, 2), samples=10, workers=0)


class TestRunReport:
    def test_csv_and_jsonl_round_trip(self, tmp_path):
        path = tmp_path / "report.csv"
        r1 = RunReport("search", "inst7", 3, 91.25, 14, 1.5, {"prefs": 16})
        r2 = RunReport("nsga2", "inst7", 3, 64.0, 80, 4.25, {"evals": 20000})
        append_report(path, r1)
        append_report(path, r2)
        rows = read_report(path)
        assert [r["algo"] for r in rows] == ["search", "nsga2"]
        assert float(rows[0]["hv_pct"]) == pytest.approx(91.25)
        with path.open() as fh:
            header = next(csv.reader(fh))
        assert header == ["algo", "instance", "seed", "hv_pct", "archive_size", "wall_s"]
        jlines = [json.loads(line) for line in path.with_suffix(".jsonl").read_text().splitlines()]
        assert jlines[1]["config"] == {"evals": 20000}

    def test_hv_out_of_range_rejected(self):
        with pytest.raises(InvalidInputError):
            RunReport("a", "b", 0, 150.0, 1, 0.0)
