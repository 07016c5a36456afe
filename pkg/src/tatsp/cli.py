"""Command-line entry point.

Exit codes: 0 success, 2 usage error, 3 no solution found, 4 infeasible solution.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import bench, generator, grasp, mip, oracle
from .construction import METHODS
from .local_search import parse_neighborhoods
from .model import (InfeasibleTourError, InstanceFormatError, TatspError, evaluate_tour, format_cost, format_solution,
                    load_instance, parse_solution, save_instance)

EXIT_OK, EXIT_USAGE, EXIT_NO_SOLUTION, EXIT_INFEASIBLE = 0, 2, 3, 4


class UsageError(Exception):
    pass


def _default_seed() -> int:
    raw = os.environ.get("TATSP_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"TATSP_SEED must be an integer, got {raw!r}") from None


def _load(path) -> object:
    try:
        return load_instance(path)
    except OSError as exc:
        raise UsageError(f"cannot read instance: {exc}") from None
    except (InstanceFormatError, TatspError) as exc:
        raise UsageError(f"{path}: {exc}") from None


def _read_solution(path):
    try:
        return parse_solution(Path(path).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read solution: {exc}") from None
    except InstanceFormatError as exc:
        raise UsageError(f"{path}: {exc}") from None


# -- commands --------------------------------------------------------------

def cmd_generate(args) -> int:
    seed = args.seed if args.seed is not None else _default_seed()
    if args.suite:
        if args.scenario or args.nodes or args.relations is not None:
            raise UsageError("--suite cannot be combined with --scenario/--nodes/--relations")
        specs = generator.rg_suite(seed)
    else:
        if not (args.scenario and args.nodes and args.relations is not None):
            raise UsageError("single-instance mode needs --scenario, --nodes and --relations")
        try:
            specs = [generator.RgSpec(generator.Scenario(args.scenario), args.nodes, args.relations, seed)]
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    out = Path(args.out)
    if not args.suite and out.suffix:
        out.parent.mkdir(parents=True, exist_ok=True)
        save_instance(generator.generate_rg(specs[0]), out)
        print(out)
        return EXIT_OK
    manifest = generator.write_suite(specs, out)
    print(f"wrote {len(specs)} instance(s) and {manifest}")
    return EXIT_OK


def cmd_solve(args) -> int:
    inst = _load(args.instance)
    try:
        cfg = grasp.GraspConfig(
            construction=args.construction, alpha=args.alpha, beta=args.beta,
            neighborhoods=parse_neighborhoods(args.neighborhoods), time_limit=args.time_limit,
            subsolver_time_limit=args.subsolver_time_limit, max_iterations=args.max_iterations,
            seed=args.seed if args.seed is not None else _default_seed(),
            parallel_workers=args.workers)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    try:
        result = grasp.run(inst, cfg)
    except grasp.NoSolutionError as exc:
        print(f"no solution: {exc}", file=sys.stderr)
        if args.summary:
            Path(args.summary).write_text(json.dumps(
                {"instance": inst.name, "config": cfg.to_dict(), "best_cost": None,
                 "iterations": exc.iterations, "construction_failures": exc.failures}, indent=2) + "\n")
        return EXIT_NO_SOLUTION
    text = format_solution(result.best_tour, result.best_cost)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    if args.summary:
        summary = {"instance": inst.name, "config": cfg.to_dict(), **result.to_dict()}
        Path(args.summary).write_text(json.dumps(summary, indent=2) + "\n")
    print(f"best cost {format_cost(result.best_cost)} after {result.iterations} iterations "
          f"({result.construction_failures} construction failures)", file=sys.stderr)
    return EXIT_OK


def cmd_evaluate(args) -> int:
    inst = _load(args.instance)
    tour, reported = _read_solution(args.solution)
    try:
        ev = evaluate_tour(inst, tour)
    except InfeasibleTourError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    active = []
    for p, r in enumerate(ev.active_relations):
        if r is not None:
            a = inst.arcs[ev.arcs[p]]
            active.append(f"r{r} on arc ({a.tail},{a.head})")
    print(f"cost {format_cost(ev.total_cost)}, active: {', '.join(active) if active else 'none'}")
    for p, (k, c) in enumerate(zip(ev.arcs, ev.arc_costs)):
        a = inst.arcs[k]
        tag = "" if ev.active_relations[p] is None else f"  [r{ev.active_relations[p]}]"
        print(f"  {p:>4}  ({a.tail},{a.head})  {format_cost(c)}{tag}")
    if reported is not None and reported != ev.total_cost:
        print(f"warning: file reports cost {reported!r}", file=sys.stderr)
    return EXIT_OK


def cmd_oracle(args) -> int:
    inst = _load(args.instance)
    try:
        res = oracle.brute_force_optimum(inst)
    except TatspError as exc:
        if isinstance(exc, InfeasibleTourError):
            print(f"infeasible: {exc}", file=sys.stderr)
            return EXIT_NO_SOLUTION
        raise UsageError(str(exc)) from None
    print(f"best cost {format_cost(res.best_cost)}")
    print("tour " + " ".join(map(str, res.best_tour)))
    print(f"enumerated {res.enumerated}")
    return EXIT_OK


def cmd_export_mip(args) -> int:
    inst = _load(args.instance)
    try:
        model = mip.build_model(inst, args.max_constraints)
    except TatspError as exc:
        raise UsageError(str(exc)) from None
    with open(args.out, "w") as fh:
        mip.write_lp(model, fh)
    counts = model.family_counts()
    print(f"wrote {args.out}: {len(model.variables)} variables, {len(model.constraints)} rows "
          + " ".join(f"{k}={counts[k]}" for k in sorted(counts)))
    return EXIT_OK


def cmd_check_mip(args) -> int:
    inst = _load(args.instance)
    tour, _ = _read_solution(args.solution)
    try:
        values = mip.tour_assignment(inst, tour)
    except InfeasibleTourError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    report = mip.check_assignment(mip.build_model(inst, args.max_constraints), values)
    print(f"feasible {report.feasible}, objective {format_cost(report.objective)}")
    for name, fam in report.violated[:20]:
        print(f"  violated ({fam}) {name}")
    return EXIT_OK if report.feasible else EXIT_INFEASIBLE


def cmd_bench(args) -> int:
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    try:
        for m in methods:
            bench.validate_method(m)
        seeds = [int(s) for s in args.seeds.split(",")] if args.seeds else [_default_seed()]
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.manifest:
        rows = generator.read_manifest(args.manifest)
        if args.nodes:
            rows = [row for row in rows if int(row["n"]) in set(args.nodes)]
        instances = [row["path"] for row in rows]
    else:
        instances = [Path(p) for p in args.instances]
    if not instances:
        raise UsageError("no instances selected")
    best_known = bench.read_best_known(args.best_known) if args.best_known else None
    settings = bench.BenchSettings(trials=args.trials, max_iterations=args.max_iterations,
                                   time_limit=args.time_limit,
                                   subsolver_time_limit=args.subsolver_time_limit,
                                   record_time=not args.no_time)
    rows = bench.run_bench(instances, methods, seeds, settings, best_known, args.workers)
    Path(args.out).write_text(bench.rows_to_csv(rows))
    summary = bench.summarize(rows)
    if args.summary:
        Path(args.summary).write_text(bench.summary_to_csv(summary))
    for s in summary:
        print(f"{s['method']:<20} gap {s['gap_pct']:<18} time {s['time_s']:<16} success {s['success']}")
    return EXIT_OK


# -- parser ----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tatsp", description="Trigger Arc TSP toolkit")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate synthetic instances")
    p.add_argument("--suite", choices=["rg"])
    p.add_argument("--scenario", choices=[s.value for s in generator.Scenario])
    p.add_argument("--nodes", type=int)
    p.add_argument("--relations", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True, help="output directory, or a file path in single-instance mode")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("solve", help="run GRASP on an instance")
    p.add_argument("--instance", required=True)
    p.add_argument("--out", help="solution file (stdout if omitted)")
    p.add_argument("--summary", help="JSON run summary")
    p.add_argument("--construction", choices=METHODS, default="mip-bias")
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--time-limit", type=float, default=60.0)
    p.add_argument("--subsolver-time-limit", type=float, default=2.0)
    p.add_argument("--max-iterations", type=int)
    p.add_argument("--neighborhoods", default="twoopt,swap,relocate")
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("evaluate", help="evaluate a solution file")
    p.add_argument("--instance", required=True)
    p.add_argument("--solution", required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("oracle", help="exhaustive optimum for small instances")
    p.add_argument("--instance", required=True)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("export-mip", help="write the MIP model in LP format")
    p.add_argument("--instance", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--max-constraints", type=int, default=mip.DEFAULT_MAX_CONSTRAINTS)
    p.set_defaults(func=cmd_export_mip)

    p = sub.add_parser("check-mip", help="check a solution against the MIP model")
    p.add_argument("--instance", required=True)
    p.add_argument("--solution", required=True)
    p.add_argument("--max-constraints", type=int, default=mip.DEFAULT_MAX_CONSTRAINTS)
    p.set_defaults(func=cmd_check_mip)

    p = sub.add_parser("bench", help="benchmark methods over instances")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--manifest")
    src.add_argument("--instances", nargs="+")
    p.add_argument("--nodes", type=int, nargs="+", help="keep manifest rows with these node counts")
    p.add_argument("--methods", default="src,rgc,mip-bias",
                   help=f"comma list from {','.join(METHODS + bench.GRASP_METHODS)}")
    p.add_argument("--seeds", help="comma-separated seeds")
    p.add_argument("--best-known", help="CSV with columns instance,best_cost")
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--max-iterations", type=int, default=20)
    p.add_argument("--time-limit", type=float, default=60.0)
    p.add_argument("--subsolver-time-limit", type=float)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--no-time", action="store_true", help="leave time_ms empty for reproducible CSVs")
    p.add_argument("--out", required=True)
    p.add_argument("--summary", help="aggregate CSV per method")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))  # exits with status 2


if __name__ == "__main__":
    sys.exit(main())
