"""Experiment runner: instance generation, solver invocation, evaluation,
and plot-ready exports.

Exit codes are a stable contract for scripting: 0 success, 2 usage error,
3 infeasible input, 4 numerical failure. Commands are idempotent for fixed
flags and seeds (wall-time fields aside). A flat JSON config file can supply
any subcommand's flags; explicit flags win, unknown keys are rejected.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import baselines, concave, instances, metrics, plotting, policy, search
from .core import ObjectiveVector, ParetoArchive, Tour, evaluate
from .decomposition import generate_preferences
from .errors import (
    DegenerateObjectiveError,
    DivergenceError,
    InfeasibleInstanceError,
    InvalidInputError,
)

ARCHIVE_SCHEMA = "list of {tour, f1, f2}"


def _default_seed() -> int:
    return int(os.environ.get("PARETO_TOUR_SEED", "0"))


def save_archive(path: str | Path, archive: ParetoArchive) -> None:
    rows = [
        {"tour": list(t.order), "f1": o.f1, "f2": o.f2}
        for t, o in sorted(archive.entries(), key=lambda e: (e[1].f1, e[1].f2))
    ]
    Path(path).write_text(json.dumps(rows, sort_keys=True, separators=(",", ":")) + "\n")


def load_archive(path: str | Path) -> ParetoArchive:
    try:
        rows = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(rows, list):
        raise InvalidInputError(f"{path}: archive must be a JSON list")
    archive = ParetoArchive()
    for row in rows:
        try:
            archive.insert(Tour(row["tour"]), ObjectiveVector(float(row["f1"]), float(row["f2"])))
        except (KeyError, TypeError) as exc:
            raise InvalidInputError(f"{path}: malformed archive entry {row!r}") from exc
    return archive


def _load_config(path_str: str, subparser: argparse.ArgumentParser) -> dict:
    """Read a flat JSON config and validate its keys against the subcommand."""
    path = Path(path_str)
    try:
        values = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidInputError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(values, dict):
        raise InvalidInputError(f"config {path} must be a flat JSON object")
    known = {a.dest for a in subparser._actions if a.dest != "help"}
    unknown = set(values) - known
    if unknown:
        raise InvalidInputError(f"config {path} has unknown keys: {sorted(unknown)}")
    return values


def _require(args: argparse.Namespace, *names: str) -> None:
    missing = [n for n in names if getattr(args, n, None) in (None, "")]
    if missing:
        flags = ", ".join("--" + n.replace("_", "-") for n in missing)
        raise InvalidInputError(f"missing required argument(s): {flags}")


def _ref_for(args, inst) -> metrics.ReferencePoint:
    if getattr(args, "ref", None):
        return metrics.ReferencePoint(args.ref[0], args.ref[1])
    return metrics.reference_point(inst.n)


def _maybe_plot(args, path: Path, fronts, ref=None, title="Pareto front") -> None:
    if getattr(args, "no_plot", False):
        return
    plotting.save_front_figure(path, fronts, ref=ref, title=title)
    print(f"figure: {path}")


# --- gen -------------------------------------------------------------------


def _cmd_gen(args) -> int:
    _require(args, "n", "output")
    if args.kind == "euclidean":
        inst = instances.gen_euclidean(args.n, args.seed)
        meta = {"kind_params": {"n": args.n}}
    else:
        inst = instances.gen_coverage(args.width, args.height, args.density, args.n, args.seed)
        meta = {
            "kind_params": {
                "width": args.width,
                "height": args.height,
                "density": args.density,
                "n": args.n,
            }
        }
    instances.save_instance(args.output, inst, seed=args.seed, meta=meta)
    print(f"instance: {args.output} (kind={args.kind}, n={inst.n}, seed={args.seed})")
    return 0


# --- solve -----------------------------------------------------------------


def _search_config(args) -> search.SearchConfig:
    return search.SearchConfig(
        outer_rounds=args.rounds,
        inner_moves=args.moves,
        restarts=args.restarts,
        seed=args.seed,
    )


def _run_algo(args, inst) -> tuple[ParetoArchive, dict]:
    algo = args.algo
    if algo == "search":
        prefs = generate_preferences(args.prefs)
        cfg = _search_config(args)
        return search.solve_front(inst, prefs, cfg), {"prefs": args.prefs, "cfg": vars(cfg).copy()}
    if algo == "policy":
        if not args.checkpoint:
            raise InvalidInputError("--checkpoint is required for --algo policy")
        pol, _, _ = policy.load_checkpoint(args.checkpoint)
        prefs = generate_preferences(args.prefs)
        archive = policy.infer_front(pol, inst, prefs, args.samples, seed=args.seed)
        return archive, {"prefs": args.prefs, "samples": args.samples,
                         "checkpoint": str(args.checkpoint)}
    if algo == "nsga2":
        cfg = baselines.EvoConfig(population=args.pop, evaluations=args.evals, seed=args.seed)
        stats: dict = {}
        archive = baselines.nsga2(inst, cfg, stats)
        return archive, {"evals": args.evals, "pop": args.pop, **stats}
    if algo == "moead":
        cfg = baselines.EvoConfig(population=args.pop, evaluations=args.evals, seed=args.seed)
        stats = {}
        archive = baselines.moead(inst, cfg, args.prefs, stats)
        return archive, {"evals": args.evals, "K": args.prefs, **stats}
    if algo == "wsum":
        cfg = _search_config(args)
        alphas = baselines.uniform_weights(args.weights)
        return baselines.weighted_sum(inst, alphas, cfg), {"weights": args.weights}
    raise InvalidInputError(f"unknown algorithm {algo!r}")


def _solve_one(args, inst, out_path: Path) -> metrics.RunReport:
    t0 = time.perf_counter()
    archive, echo = _run_algo(args, inst)
    wall = time.perf_counter() - t0
    save_archive(out_path, archive)
    ref = _ref_for(args, inst)
    pts, clipped = metrics.clip_to_box(archive.objectives(), ref)
    echo.update(ref=[ref.r1, ref.r2], ref_violations=clipped, jobs=args.jobs)
    report = metrics.RunReport(
        algo=args.algo,
        instance=Path(args.instance).stem,
        seed=args.seed,
        hv_pct=metrics.hv_exact_2d(pts, ref),
        archive_size=len(archive),
        wall_s=wall,
        config=echo,
    )
    return report


def _cmd_solve(args) -> int:
    _require(args, "algo", "instance", "output")
    inst = instances.load_instance(args.instance)
    out_path = Path(args.output)
    report = _solve_one(args, inst, out_path)
    report_path = Path(args.report) if args.report else out_path.parent / "report.csv"
    metrics.append_report(report_path, report)
    archive = load_archive(out_path)
    print(
        f"{args.algo}: archive {out_path} ({len(archive)} entries), "
        f"HV {report.hv_pct:.2f}%, wall {report.wall_s:.2f}s, report {report_path}"
    )
    ref = _ref_for(args, inst)
    _maybe_plot(
        args,
        out_path.with_suffix(".png"),
        [(args.algo, archive.objectives())],
        ref=(ref.r1, ref.r2),
        title=f"{args.algo} front on {Path(args.instance).stem}",
    )
    return 0


# --- train / infer ----------------------------------------------------------


def _cmd_train(args) -> int:
    _require(args, "output")
    cfg = policy.TrainConfig(
        iterations=args.iters,
        batch_size=args.batch,
        K=args.k,
        eta_actor=args.eta_actor,
        eta_critic=args.eta_critic,
        alpha=args.alpha,
        seed=args.seed,
        preference_features=not args.no_pref_features,
    )
    history: list[float] = []

    def track(_it: int, rewards: np.ndarray) -> None:
        history.append(float(rewards.mean()))

    t0 = time.perf_counter()
    pol, critic, mult = policy.train(policy.euclidean_distribution(args.n), cfg, track)
    wall = time.perf_counter() - t0
    policy.save_checkpoint(args.output, pol, critic, mult)
    first = history[0] if history else math.nan
    last = history[-1] if history else math.nan
    print(
        f"trained {args.iters} iters (n={args.n}, K={args.k}, B={args.batch}) "
        f"in {wall:.1f}s; mean reward {first:.4f} -> {last:.4f}; checkpoint {args.output}"
    )
    return 0


def _cmd_infer(args) -> int:
    _require(args, "checkpoint")
    args.algo = "policy"
    return _cmd_solve(args)


# --- eval -------------------------------------------------------------------


def _cmd_eval(args) -> int:
    _require(args, "archive")
    inst = instances.load_instance(args.instance) if args.instance else None
    archive = load_archive(args.archive)
    if inst is None and not args.ref:
        raise InvalidInputError("eval needs either --instance (for the default ref) or --ref")
    ref = (
        metrics.ReferencePoint(args.ref[0], args.ref[1])
        if args.ref
        else metrics.reference_point(inst.n)
    )
    pts, clipped = metrics.clip_to_box(archive.objectives(), ref)
    t0 = time.perf_counter()
    mc = metrics.hv_monte_carlo(pts, ref, samples=args.samples, seed=args.seed, workers=args.jobs)
    wall = time.perf_counter() - t0
    exact = metrics.hv_exact_2d(pts, ref)
    print(
        f"HV exact {exact:.4f}% | MC({args.samples} samples) {mc:.4f}% | "
        f"ref ({ref.r1:g}, {ref.r2:g}) | {clipped} point(s) outside ref box"
    )
    if args.report:
        report = metrics.RunReport(
            algo="eval",
            instance=Path(args.instance).stem if args.instance else "-",
            seed=args.seed,
            hv_pct=exact,
            archive_size=len(archive),
            wall_s=wall,
            config={
                "mc_hv_pct": mc,
                "samples": args.samples,
                "ref": [ref.r1, ref.r2],
                "ref_violations": clipped,
                "jobs": args.jobs,
            },
        )
        metrics.append_report(args.report, report)
        print(f"report: {args.report}")
    _maybe_plot(
        args,
        Path(args.archive).with_suffix(".eval.png"),
        [("archive", archive.objectives())],
        ref=(ref.r1, ref.r2),
        title=f"archive vs ref ({ref.r1:g}, {ref.r2:g})",
    )
    return 0


# --- compare ----------------------------------------------------------------


def _cmd_compare(args) -> int:
    _require(args, "instance")
    inst = instances.load_instance(args.instance)
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    algos = [a.strip() for a in args.algos.split(",") if a.strip()]
    fronts = []
    report_path = outdir / "report.csv"
    for algo in algos:
        args.algo = algo
        out_path = outdir / f"{algo}.json"
        report = _solve_one(args, inst, out_path)
        metrics.append_report(report_path, report)
        fronts.append((algo, load_archive(out_path).objectives()))
        print(f"{algo}: HV {report.hv_pct:.2f}%, {report.archive_size} entries, "
              f"{report.wall_s:.2f}s")
    ref = _ref_for(args, inst)
    _maybe_plot(
        args,
        outdir / "compare.png",
        fronts,
        ref=(ref.r1, ref.r2),
        title=f"fronts on {Path(args.instance).stem}",
    )
    print(f"report: {report_path}")
    return 0


# --- demo-concave -----------------------------------------------------------


def _cmd_demo_concave(args) -> int:
    cfg = concave.ConcaveConfig()
    prefs = generate_preferences(args.k)
    dec_points, dec_objs = concave.solve_concave_front(prefs, cfg)
    alphas = baselines.uniform_weights(args.weights)
    sc_points, sc_objs = concave.linear_scalarization_sweep(alphas, cfg)

    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    csv_path = outdir / "concave_demo.csv"
    with csv_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["method", "w_or_alpha", "x1", "x2", "f1", "f2"])
        for w, x, f in zip(prefs, dec_points, dec_objs):
            writer.writerow(
                ["decomposition", f"{math.degrees(w.angle):.6f}",
                 f"{x[0]:.9f}", f"{x[1]:.9f}", f"{f.f1:.9f}", f"{f.f2:.9f}"]
            )
        for (a1, _), x, f in zip(alphas, sc_points, sc_objs):
            writer.writerow(
                ["scalarization", f"{a1:.6f}",
                 f"{x[0]:.9f}", f"{x[1]:.9f}", f"{f.f1:.9f}", f"{f.f2:.9f}"]
            )

    distinct = concave.count_distinct(dec_objs, 0.02)
    clusters = concave.count_clusters(sc_objs, 0.05)
    print(
        f"decomposition: {len(dec_objs)} solutions, {distinct} distinct (>0.02 apart); "
        f"scalarization: {len(sc_objs)} solutions in {clusters} cluster(s) (radius 0.05)"
    )
    print(f"csv: {csv_path}")
    if not args.no_plot:
        grid = np.linspace(-1.0, 1.0, 121)
        xx, yy = np.meshgrid(grid, grid)
        cloud_x = np.column_stack([xx.ravel(), yy.ravel()])
        cf1, cf2 = concave._objectives(cloud_x)
        plotting.save_concave_figure(
            outdir / "concave_demo.png",
            dec_objs,
            sc_objs,
            attainable=list(zip(cf1.tolist(), cf2.tolist())),
        )
        print(f"figure: {outdir / 'concave_demo.png'}")
    return 0


# --- parser ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pareto-tour",
        description="Bi-objective TSP Pareto-front toolkit: generate, solve, evaluate.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    seed_default = _default_seed()

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--seed", type=int, default=seed_default,
                       help="RNG seed (env PARETO_TOUR_SEED overrides the 0 default)")
        p.add_argument("--config", help="flat JSON file of flag values (flags win)")
        p.add_argument("--jobs", type=int, default=1, help="worker bound for parallel stages")
        p.add_argument("--no-plot", action="store_true", help="skip figure output")

    gen = sub.add_parser("gen", help="generate an instance file")
    gen_sub = gen.add_subparsers(dest="kind", required=True)
    gen_e = gen_sub.add_parser("euclidean", help="uniform 4-D city coordinates")
    gen_e.add_argument("--n", type=int)
    gen_e.add_argument("-o", "--output")
    common(gen_e)
    gen_e.set_defaults(func=_cmd_gen)
    gen_c = gen_sub.add_parser("coverage", help="grid-map pipeline (A* + random metric)")
    gen_c.add_argument("--width", type=int, default=30)
    gen_c.add_argument("--height", type=int, default=30)
    gen_c.add_argument("--density", type=float, default=0.2)
    gen_c.add_argument("--n", type=int)
    gen_c.add_argument("-o", "--output")
    common(gen_c)
    gen_c.set_defaults(func=_cmd_gen)

    def solver_flags(p: argparse.ArgumentParser, with_algo: bool = True) -> None:
        if with_algo:
            p.add_argument("--algo", choices=["search", "policy", "nsga2", "moead", "wsum"])
        p.add_argument("-i", "--instance")
        p.add_argument("-o", "--output", help="archive JSON path")
        p.add_argument("--prefs", type=int, default=100,
                       help="preference count (search/policy) or MOEA/D subproblems")
        p.add_argument("--samples", type=int, default=1, help="policy samples per preference")
        p.add_argument("--checkpoint", help="trained policy checkpoint (policy algo)")
        p.add_argument("--weights", type=int, default=100, help="wsum scalarization weights")
        p.add_argument("--evals", type=int, default=20_000, help="evolutionary budget")
        p.add_argument("--pop", type=int, default=100, help="NSGA-II population")
        p.add_argument("--rounds", type=int, default=search.SearchConfig().outer_rounds)
        p.add_argument("--moves", type=int, default=search.SearchConfig().inner_moves)
        p.add_argument("--restarts", type=int, default=search.SearchConfig().restarts)
        p.add_argument("--ref", type=float, nargs=2, metavar=("R1", "R2"),
                       help="reference point override")
        p.add_argument("--report", help="report CSV path (default: report.csv beside output)")
        common(p)

    solve = sub.add_parser("solve", help="run one solver, write archive + report")
    solver_flags(solve)
    solve.set_defaults(func=_cmd_solve)

    train = sub.add_parser("train", help="train the policy solver")
    train.add_argument("--n", type=int, default=10, help="cities per training instance")
    train.add_argument("--k", type=int, default=20, help="training preference count")
    train.add_argument("--iters", type=int, default=2000)
    train.add_argument("--batch", type=int, default=8)
    train.add_argument("--eta-actor", type=float, default=1e-2)
    train.add_argument("--eta-critic", type=float, default=1e-2)
    train.add_argument("--alpha", type=float, default=1e-3, help="multiplier ascent rate")
    train.add_argument("--no-pref-features", action="store_true",
                       help="ablation: drop preference interaction features")
    train.add_argument("-o", "--output", help="checkpoint JSON path")
    common(train)
    train.set_defaults(func=_cmd_train)

    infer = sub.add_parser("infer", help="decode fronts from a trained checkpoint")
    solver_flags(infer, with_algo=False)
    infer.set_defaults(func=_cmd_infer, algo="policy")

    evalp = sub.add_parser("eval", help="hypervolume of an archive file")
    evalp.add_argument("-i", "--instance", help="instance file (for the default ref rule)")
    evalp.add_argument("-a", "--archive")
    evalp.add_argument("--ref", type=float, nargs=2, metavar=("R1", "R2"))
    evalp.add_argument("--samples", type=int, default=1_000_000)
    evalp.add_argument("--report", help="append a RunReport row to this CSV")
    common(evalp)
    evalp.set_defaults(func=_cmd_eval)

    comp = sub.add_parser("compare", help="run several solvers on one instance")
    comp.add_argument("-i", "--instance")
    comp.add_argument("--algos", default="search,nsga2,moead,wsum")
    comp.add_argument("--outdir", default="compare_out")
    comp.add_argument("--prefs", type=int, default=100)
    comp.add_argument("--samples", type=int, default=1)
    comp.add_argument("--checkpoint")
    comp.add_argument("--weights", type=int, default=100)
    comp.add_argument("--evals", type=int, default=20_000)
    comp.add_argument("--pop", type=int, default=100)
    comp.add_argument("--rounds", type=int, default=search.SearchConfig().outer_rounds)
    comp.add_argument("--moves", type=int, default=search.SearchConfig().inner_moves)
    comp.add_argument("--restarts", type=int, default=search.SearchConfig().restarts)
    comp.add_argument("--ref", type=float, nargs=2, metavar=("R1", "R2"))
    common(comp)
    comp.set_defaults(func=_cmd_compare)

    demo = sub.add_parser("demo-concave", help="concave-front comparison experiment")
    demo.add_argument("--k", type=int, default=20, help="decomposition preferences")
    demo.add_argument("--weights", type=int, default=100, help="scalarization weights")
    demo.add_argument("--outdir", default=".")
    common(demo)
    demo.set_defaults(func=_cmd_demo_concave)

    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "config", None):
            sub = _subparser_for(parser, argv)
            sub.set_defaults(**_load_config(args.config, sub))
            args = parser.parse_args(argv)  # explicit flags still win
        return args.func(args)
    except InvalidInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except InfeasibleInstanceError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return 3
    except (DivergenceError, DegenerateObjectiveError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 4


def _subparser_for(parser: argparse.ArgumentParser, argv: list[str]) -> argparse.ArgumentParser:
    """Locate the subparser that parsed argv (for config-key validation)."""
    sub_actions = [a for a in parser._actions if isinstance(a, argparse._SubParsersAction)]
    current = parser
    rest = argv
    while sub_actions and rest:
        name = rest[0]
        choices = sub_actions[0].choices
        if name in choices:
            current = choices[name]
            rest = rest[1:]
            sub_actions = [
                a for a in current._actions if isinstance(a, argparse._SubParsersAction)
            ]
        else:
            break
    return current


if __name__ == "__main__":
    sys.exit(main())
