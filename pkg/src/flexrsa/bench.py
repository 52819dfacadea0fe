"""Benchmark harness: run (instance x variant x solver) cells over a corpus
directory and report a per-cell CSV plus an aggregated Markdown table
(mean variable counts per variant, mean runtimes per solver/variant pair).

Instances are `*.json` files; a sibling `<name>.manifest.json` (as written by
`flexrsa gen`) supplies the grouping metadata (kind, modulation, broken link).
Rows are sorted by (case, variant, solver), so reruns differ only in the
timing columns.
"""

from __future__ import annotations

import csv
import io
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

from .backend import INFEASIBLE, SolverConfig, solve
from .extract import extract_paths, verify_solution
from .io import load_instance
from .milp import build_model, model_statistics
from .model import InputError
from .trimming import compute_useful_triples, is_infeasible_by_trimming

CSV_COLUMNS = [
    "case", "kind", "modulation", "broken_link", "variant", "solver",
    "variables", "constraints", "trim_seconds", "build_seconds",
    "solve_seconds", "status", "objective",
]


@dataclass
class BenchCase:
    name: str
    path: str
    manifest: dict

    @property
    def group(self) -> str:
        topo = self.manifest.get("topology", "corpus")
        mod = self.manifest.get("modulation") or "?"
        label = f"{topo}-{mod}"
        if self.manifest.get("kind") == "second":
            label += f" {self.manifest.get('first_break')}"
        return label


def discover_cases(corpus_dir: str) -> list:
    cases = []
    for entry in sorted(os.listdir(corpus_dir)):
        if not entry.endswith(".json"):
            continue
        if entry.endswith(".manifest.json") or "solution" in entry:
            continue
        path = os.path.join(corpus_dir, entry)
        manifest_path = path[: -len(".json")] + ".manifest.json"
        manifest = {}
        if os.path.exists(manifest_path):
            with open(manifest_path, "r", encoding="utf-8") as fh:
                manifest = json.load(fh)
        cases.append(BenchCase(entry[: -len(".json")], path, manifest))
    return cases


def run_cell(
    case: BenchCase,
    instance,
    triples,
    trim_seconds: float,
    variant: str,
    solver: str,
    mode: str,
    time_limit: float,
) -> dict:
    row = {
        "case": case.name,
        "kind": case.manifest.get("kind", ""),
        "modulation": case.manifest.get("modulation", ""),
        "broken_link": case.manifest.get("broken_link", ""),
        "variant": variant,
        "solver": solver,
        "trim_seconds": round(trim_seconds, 6),
    }
    if mode == "feasibility" and is_infeasible_by_trimming(triples, instance.demands):
        row.update(
            variables=0, constraints=0, build_seconds=0.0, solve_seconds=0.0,
            status=INFEASIBLE, objective="",
        )
        return row

    t0 = time.perf_counter()
    model = build_model(instance, triples, variant, mode)
    build_seconds = time.perf_counter() - t0
    stats = model_statistics(model)
    outcome = solve(model, SolverConfig(solver=solver, time_limit=time_limit))
    status = outcome.status
    if outcome.assignment is not None:
        try:
            result = extract_paths(outcome.assignment, model, instance)
            if not verify_solution(result.paths, instance).ok:
                status = "error"
        except Exception:
            if outcome.status == "optimal":
                status = "error"
    row.update(
        variables=stats.variables,
        constraints=stats.constraints,
        build_seconds=round(build_seconds, 6),
        solve_seconds=round(outcome.wall_seconds, 6),
        status=status,
        objective="" if outcome.objective is None else outcome.objective,
    )
    return row


def run_bench(
    corpus_dir: str,
    variants=("base", "notrim", "trimmed"),
    solvers=("auto",),
    mode: str = "feasibility",
    time_limit: float = 500.0,
    jobs: int = 2,
) -> list:
    cases = discover_cases(corpus_dir)
    prepared = []
    for case in cases:
        try:
            instance = load_instance(case.path)
        except InputError as exc:
            print(f"bench: skipping {case.path}: {exc}", file=sys.stderr)
            continue
        t0 = time.perf_counter()
        triples = compute_useful_triples(instance)
        trim_seconds = time.perf_counter() - t0
        prepared.append((case, instance, triples, trim_seconds))

    cells = [
        (case, instance, triples, trim_seconds, variant, solver)
        for case, instance, triples, trim_seconds in prepared
        for variant in variants
        for solver in solvers
    ]
    with ThreadPoolExecutor(max_workers=max(jobs, 1)) as pool:
        rows = list(
            pool.map(
                lambda cell: run_cell(*cell[:6], mode=mode, time_limit=time_limit),
                cells,
            )
        )
    rows.sort(key=lambda r: (r["case"], r["variant"], r["solver"]))
    return rows


def rows_to_csv(rows: list) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()


def _mean(values) -> Optional[float]:
    values = [v for v in values if v is not None]
    return sum(values) / len(values) if values else None


def rows_to_markdown(rows: list, cases: list, exclude_over: Optional[float] = None) -> str:
    """Table-of-means per case group; optionally a second table excluding
    cells slower than `exclude_over` seconds."""
    group_of = {c.name: c.group for c in cases}
    variants = sorted({r["variant"] for r in rows})
    solvers = sorted({r["solver"] for r in rows})

    def build_table(selected_rows, title):
        groups: dict = {}
        for row in selected_rows:
            groups.setdefault(group_of.get(row["case"], "corpus"), []).append(row)
        header = (
            ["Case", "#Tests"]
            + [f"Vars {v}" for v in variants]
            + [f"{s}/{v} s" for s in solvers for v in variants]
        )
        lines = [f"### {title}", ""]
        lines.append("| " + " | ".join(header) + " |")
        lines.append("|" + "---|" * len(header))
        for group in sorted(groups):
            grows = groups[group]
            n_tests = len({r["case"] for r in grows})
            cells = [group, str(n_tests)]
            for v in variants:
                mean = _mean(
                    [r["variables"] for r in grows if r["variant"] == v]
                )
                cells.append("" if mean is None else f"{mean:.0f}")
            for s in solvers:
                for v in variants:
                    mean = _mean(
                        [
                            r["solve_seconds"]
                            for r in grows
                            if r["variant"] == v and r["solver"] == s
                        ]
                    )
                    cells.append("" if mean is None else f"{mean:.2f}")
            lines.append("| " + " | ".join(cells) + " |")
        lines.append("")
        return lines

    out = build_table(rows, "All test cases")
    if exclude_over is not None:
        kept = [r for r in rows if r["solve_seconds"] <= exclude_over]
        out += build_table(
            kept, f"Excluding cells over {exclude_over:g} s"
        )
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# Kernel benchmark (compiled vs pure Python trimming)
# ---------------------------------------------------------------------------

def kernel_bench(instance, repeats: int = 3) -> dict:
    from . import kernels

    impls = kernels.available_kernels()
    results: dict = {}
    outputs: dict = {}
    for name, impl in impls.items():
        best = float("inf")
        for _ in range(repeats):
            t0 = time.perf_counter()
            triples = compute_useful_triples(instance, kernel=impl)
            best = min(best, time.perf_counter() - t0)
        results[name] = best
        outputs[name] = triples
    names = list(outputs)
    for other in names[1:]:
        if outputs[other].useful != outputs[names[0]].useful:
            raise AssertionError("kernel implementations disagree")
    return results
