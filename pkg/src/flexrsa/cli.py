"""Command-line interface.

Subcommands: trim, solve, oracle, gen, validate, bench, kernel-bench.
Exit codes for `solve`/`oracle`: 0 feasible, 10 infeasible, 20 time limit,
1 error. `validate` exits 0 only on a clean report. Every artifact embeds
seed, variant, solver identity and tool version.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

from . import __version__
from .backend import (
    INFEASIBLE,
    OPTIMAL,
    TIMELIMIT,
    SolverConfig,
    SolverNotFound,
    solve as backend_solve,
)
from .extract import ExtractionError, extract_paths, solution_to_dict, verify_solution
from .io import dump_json, dumps_json, instance_to_dict, load_instance
from .milp import build_model, model_statistics
from .model import InputError, RestorationInstance, RoutedPath
from .oracle import OracleGuard, OracleGuardError, oracle_solve
from .testgen import (
    BUILTIN_TOPOLOGIES,
    MODULATION_REACH_KM,
    GenerationError,
    builtin_topology_path,
    generate_loaded_network,
    make_scenario,
)
from .trimming import compute_useful_triples, is_infeasible_by_trimming, triples_to_dict

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INFEASIBLE = 10
EXIT_TIMELIMIT = 20


def _emit(doc: dict, out_path):
    text = dumps_json(doc)
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _resolve_topology(arg: str) -> str:
    if os.path.exists(arg):
        return arg
    if arg in BUILTIN_TOPOLOGIES:
        return builtin_topology_path(arg)
    raise InputError(
        f"topology {arg!r} is neither a file nor a builtin name {BUILTIN_TOPOLOGIES}"
    )


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_trim(args) -> int:
    instance = load_instance(args.instance)
    t0 = time.perf_counter()
    triples = compute_useful_triples(instance)
    trim_seconds = time.perf_counter() - t0
    doc = triples_to_dict(triples, instance)
    doc["meta"] = {
        "instance": args.instance,
        "tool_version": __version__,
        "trim_seconds": round(trim_seconds, 6),
        "infeasible": is_infeasible_by_trimming(triples, instance.demands),
    }
    _emit(doc, args.output)
    return EXIT_OK


def cmd_solve(args) -> int:
    instance = load_instance(args.instance)
    t0 = time.perf_counter()
    triples = compute_useful_triples(instance)
    trim_seconds = time.perf_counter() - t0

    meta = {
        "instance": args.instance,
        "variant": args.variant,
        "mode": args.mode,
        "solver": args.solver,
        "time_limit": args.time_limit,
        "tool_version": __version__,
        "timings": {"trim_seconds": round(trim_seconds, 6)},
        "solver_invoked": False,
    }

    excluded = sorted(
        d.id for d in instance.demands if d.id in triples.non_reroutable
    )
    if args.mode == "feasibility" and excluded:
        meta["proven_by"] = "trimming"
        meta["non_reroutable"] = excluded
        _emit(solution_to_dict(INFEASIBLE, None, None, None, meta), args.output)
        return EXIT_INFEASIBLE
    if args.mode == "maxsubset" and excluded:
        meta["excluded_non_reroutable"] = excluded
        instance = RestorationInstance(
            instance.network,
            tuple(d for d in instance.demands if d.id not in excluded),
        )
        triples = compute_useful_triples(instance)

    t0 = time.perf_counter()
    model = build_model(instance, triples, args.variant, args.mode)
    build_seconds = time.perf_counter() - t0
    meta["timings"]["build_seconds"] = round(build_seconds, 6)
    meta["model"] = model_statistics(model).to_dict()

    config = SolverConfig(
        solver=args.solver,
        time_limit=args.time_limit,
        workdir=args.workdir,
        keep_files=args.keep_files,
    )
    outcome = backend_solve(model, config)
    meta["solver_invoked"] = outcome.solver_name != "trivial"
    meta["solver_name"] = outcome.solver_name
    meta["timings"]["solve_seconds"] = round(outcome.wall_seconds, 6)
    if outcome.message:
        meta["solver_message"] = outcome.message

    result = None
    report = None
    if outcome.assignment is not None:
        try:
            result = extract_paths(outcome.assignment, model, instance, triples)
            report = verify_solution(result.paths, instance)
            meta["verified"] = report.ok
        except ExtractionError as exc:
            if outcome.status == OPTIMAL:
                raise
            meta["extraction_error"] = str(exc)  # non-optimal incumbents only

    _emit(
        solution_to_dict(outcome.status, outcome.objective, result, report, meta),
        args.output,
    )
    if outcome.status in (OPTIMAL, "feasible"):
        return EXIT_OK
    if outcome.status == INFEASIBLE:
        return EXIT_INFEASIBLE
    if outcome.status == TIMELIMIT:
        return EXIT_TIMELIMIT
    return EXIT_ERROR


def cmd_oracle(args) -> int:
    instance = load_instance(args.instance)
    guard = OracleGuard(args.max_nodes, args.max_colors, args.max_demands)
    outcome = oracle_solve(instance, args.mode, guard)
    result_paths = dict(outcome.witness)
    meta = {
        "instance": args.instance,
        "mode": args.mode,
        "oracle": True,
        "tool_version": __version__,
        "optima_count": outcome.optima_count,
    }
    from .extract import ExtractResult

    if args.mode == "maxsubset":
        meta["max_subset_size"] = outcome.max_subset_size
        result = ExtractResult(paths=result_paths, restored=outcome.restored)
        status = OPTIMAL
        objective = outcome.max_subset_size
    else:
        result = ExtractResult(paths=result_paths)
        status = OPTIMAL if outcome.feasible else INFEASIBLE
        objective = outcome.min_total_slots
    report = verify_solution(result.paths, instance) if result_paths else None
    _emit(solution_to_dict(status, objective, result, report, meta), args.output)
    return EXIT_OK if outcome.feasible or args.mode == "maxsubset" else EXIT_INFEASIBLE


def cmd_gen(args) -> int:
    topo_path = _resolve_topology(args.topology)
    topology = load_instance(topo_path).network
    if args.slot_count:
        full = {l.id: range(1, args.slot_count + 1) for l in topology.links}
        topology = type(topology)(
            topology.nodes, topology.links, full, args.slot_count
        )
    widths = tuple(int(w) for w in args.widths.split(","))
    loaded = generate_loaded_network(
        topology,
        reach_km=MODULATION_REACH_KM[args.modulation],
        width_schedule=widths,
        seed=args.seed,
        modulation=args.modulation,
    )

    topo_name = (
        args.topology
        if args.topology in BUILTIN_TOPOLOGIES
        else os.path.splitext(os.path.basename(topo_path))[0]
    )
    base = {
        "topology": topo_name,
        "tool_version": __version__,
        "slot_count": topology.slot_count,
    }
    if args.break_link is None:
        name = args.name or f"{topo_name}-{args.modulation}-s{args.seed}-loaded"
        instance = RestorationInstance(loaded.network, ())
        manifest = dict(
            base,
            seed=loaded.seed,
            modulation=args.modulation,
            reach_km=loaded.reach_km,
            width_schedule=list(loaded.width_schedule),
            demands_provisioned=len(loaded.provisioned),
            eligible_links=loaded.eligible_links(),
        )
    else:
        scenario = make_scenario(
            loaded, args.break_link, args.kind, first_break=args.first_break
        )
        name = args.name or (
            f"{topo_name}-{args.modulation}-s{args.seed}"
            f"-b{args.break_link}-{args.kind}"
        )
        instance = scenario.instance
        manifest = dict(base, **scenario.manifest)

    os.makedirs(args.out_dir, exist_ok=True)
    instance_path = os.path.join(args.out_dir, f"{name}.json")
    manifest_path = os.path.join(args.out_dir, f"{name}.manifest.json")
    dump_json(instance_to_dict(instance), instance_path)
    dump_json(manifest, manifest_path)
    print(instance_path)
    print(manifest_path)
    return EXIT_OK


def cmd_validate(args) -> int:
    instance = load_instance(args.instance)
    with open(args.solution, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    paths = {}
    for entry in doc.get("paths", []):
        try:
            links = tuple(instance.network.link(i) for i in entry["links"])
        except InputError as exc:
            print(f"solution references {exc}", file=sys.stderr)
            return EXIT_ERROR
        paths[entry["demand"]] = RoutedPath(
            links=links,
            first_color=entry["first_color"],
            width=entry["width"],
        )
    report = verify_solution(paths, instance)
    _emit(
        {
            "ok": report.ok,
            "violations": [v.to_dict() for v in report.violations],
            "meta": {"tool_version": __version__, "paths_checked": len(paths)},
        },
        args.output,
    )
    return EXIT_OK if report.ok else EXIT_ERROR


def cmd_bench(args) -> int:
    from .bench import discover_cases, rows_to_csv, rows_to_markdown, run_bench

    rows = run_bench(
        args.corpus_dir,
        variants=tuple(args.variants.split(",")),
        solvers=tuple(args.solvers.split(",")),
        mode=args.mode,
        time_limit=args.time_limit,
        jobs=args.jobs,
    )
    cases = discover_cases(args.corpus_dir)
    csv_text = rows_to_csv(rows)
    md_text = rows_to_markdown(rows, cases, exclude_over=args.exclude_over)
    with open(args.csv, "w", encoding="utf-8") as fh:
        fh.write(csv_text)
    with open(args.md, "w", encoding="utf-8") as fh:
        fh.write(md_text)
    print(args.csv)
    print(args.md)
    return EXIT_OK


def cmd_kernel_bench(args) -> int:
    from . import kernels
    from .bench import kernel_bench

    topology = load_instance(_resolve_topology(args.topology)).network
    loaded = generate_loaded_network(
        topology,
        reach_km=MODULATION_REACH_KM[args.modulation],
        seed=args.seed,
        modulation=args.modulation,
    )
    eligible = loaded.eligible_links()
    if not eligible:
        print("no eligible link; try another seed", file=sys.stderr)
        return EXIT_ERROR
    scenario = make_scenario(loaded, eligible[0], "first")
    results = kernel_bench(scenario.instance, repeats=args.repeats)
    print(
        f"trimming kernel benchmark: |D|={len(scenario.instance.demands)} "
        f"|L|={len(scenario.instance.network.links)} C={topology.slot_count} "
        f"(selected backend: {kernels.KERNEL_BACKEND})"
    )
    baseline = results.get("pure-python")
    for name, seconds in sorted(results.items()):
        speedup = f"  ({baseline / seconds:.1f}x vs pure-python)" if (
            baseline and name != "pure-python"
        ) else ""
        print(f"  {name:12s} {seconds * 1000:9.2f} ms{speedup}")
    if "compiled" not in results:
        print("  compiled kernel not built; run: python setup.py build_ext --inplace")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="flexrsa",
        description="Exact solver and benchmark rig for restoration-style "
        "routing and spectrum allocation",
    )
    parser.add_argument("--version", action="version", version=f"flexrsa {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("trim", help="compute useful triples and stats")
    p.add_argument("instance")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_trim)

    p = sub.add_parser("solve", help="trim, build a MILP variant, solve, extract")
    p.add_argument("instance")
    p.add_argument("--variant", choices=("base", "notrim", "trimmed"), default="trimmed")
    p.add_argument("--mode", choices=("feasibility", "maxsubset"), default="feasibility")
    p.add_argument("--solver", default="auto",
                   help='"auto", "cbc", "scip", "builtin", or "cmd:<template>"')
    p.add_argument("--time-limit", type=float, default=500.0)
    p.add_argument("--workdir")
    p.add_argument("--keep-files", action="store_true")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("oracle", help="exhaustive ground truth (small instances)")
    p.add_argument("instance")
    p.add_argument("--mode", choices=("feasibility", "maxsubset"), default="feasibility")
    p.add_argument("--max-nodes", type=int, default=8)
    p.add_argument("--max-colors", type=int, default=6)
    p.add_argument("--max-demands", type=int, default=4)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("gen", help="generate loaded networks and break scenarios")
    p.add_argument("topology", help=f"instance JSON path or one of {BUILTIN_TOPOLOGIES}")
    p.add_argument("--modulation", choices=sorted(MODULATION_REACH_KM), required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--slot-count", type=int)
    p.add_argument("--widths", default="1,4,2,1")
    p.add_argument("--break", dest="break_link", type=int)
    p.add_argument("--kind", choices=("first", "second"), default="first")
    p.add_argument("--first-break", type=int)
    p.add_argument("--out-dir", default=".")
    p.add_argument("--name")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("validate", help="verify a solution JSON against an instance")
    p.add_argument("instance")
    p.add_argument("solution")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("bench", help="run a corpus and emit CSV + Markdown tables")
    p.add_argument("corpus_dir")
    p.add_argument("--variants", default="base,notrim,trimmed")
    p.add_argument("--solvers", default="auto")
    p.add_argument("--mode", choices=("feasibility", "maxsubset"), default="feasibility")
    p.add_argument("--time-limit", type=float, default=500.0)
    p.add_argument("--jobs", type=int, default=2)
    p.add_argument("--csv", default="bench.csv")
    p.add_argument("--md", default="bench.md")
    p.add_argument("--exclude-over", type=float)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("kernel-bench", help="compare compiled vs pure-Python trimming")
    p.add_argument("--topology", default="ring14")
    p.add_argument("--modulation", choices=sorted(MODULATION_REACH_KM), default="qpsk")
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--repeats", type=int, default=3)
    p.set_defaults(func=cmd_kernel_bench)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InputError, GenerationError, OracleGuardError, SolverNotFound) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
