"""Benchmark harness: run methods over a manifest and tabulate gaps and success rates."""

from __future__ import annotations

import csv
import io
import logging
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import oracle
from .construction import DEFAULT_PARAMS, METHODS, construct
from .grasp import GraspConfig, NoSolutionError, run
from .local_search import DEFAULT_NEIGHBORHOODS
from .model import Instance, gap, load_instance, tour_cost
from .subsolver import SubsolverConfig

log = logging.getLogger(__name__)

ROW_FIELDS = ("instance", "method", "seed", "cost", "best_known", "gap_pct", "time_ms", "success")
GRASP_METHODS = ("grasp", "grasp-no-twoopt", "grasp-no-swap", "grasp-no-relocate")
ORACLE_MAX_NODES = 10


@dataclass(frozen=True)
class BenchRow:
    instance: str
    method: str
    seed: int
    cost: float | None
    best_known: float | None
    gap_pct: float | None
    time_ms: int | None
    success: bool

    def as_csv(self) -> list[str]:
        def fmt(v):
            return "" if v is None else repr(v)
        return [self.instance, self.method, str(self.seed), fmt(self.cost), fmt(self.best_known),
                fmt(self.gap_pct), "" if self.time_ms is None else str(self.time_ms),
                "1" if self.success else "0"]


@dataclass(frozen=True)
class BenchSettings:
    trials: int = 10  # constructions per cell for construction-only methods
    max_iterations: int | None = 20  # GRASP iteration cap; None = wall clock only
    time_limit: float = 60.0
    subsolver_time_limit: float | None = None
    record_time: bool = True


def validate_method(method: str) -> str:
    if method not in METHODS and method not in GRASP_METHODS:
        raise ValueError(f"unknown method {method!r}; choose from {METHODS + GRASP_METHODS}")
    return method


def solve_cell(inst: Instance, method: str, seed: int, settings: BenchSettings):
    """Return ``(best_cost or None, elapsed_seconds)`` for one (instance, method, seed)."""
    t0 = time.perf_counter()
    if method in METHODS:
        alpha, beta = DEFAULT_PARAMS[method]
        sub = SubsolverConfig(time_limit=settings.subsolver_time_limit)
        best = None
        for trial in range(settings.trials):
            rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, trial])))
            tour = construct(inst, method, rng, alpha, beta, sub)
            if tour is not None:
                cost = tour_cost(inst, tour)
                best = cost if best is None else min(best, cost)
        return best, time.perf_counter() - t0

    dropped = method.removeprefix("grasp-no-") if method != "grasp" else None
    kinds = tuple(k for k in DEFAULT_NEIGHBORHOODS if k.value != dropped)
    cfg = GraspConfig(neighborhoods=kinds, time_limit=settings.time_limit,
                      subsolver_time_limit=settings.subsolver_time_limit,
                      max_iterations=settings.max_iterations, seed=seed)
    try:
        result = run(inst, cfg)
    except NoSolutionError:
        return None, time.perf_counter() - t0
    return result.best_cost, time.perf_counter() - t0


def read_best_known(path: str | Path) -> dict[str, float]:
    with Path(path).open(newline="") as fh:
        return {row["instance"]: float(row["best_cost"]) for row in csv.DictReader(fh)}


def oracle_best_known(inst: Instance) -> float | None:
    if inst.node_count > ORACLE_MAX_NODES:
        return None
    try:
        return oracle.brute_force_optimum(inst).best_cost
    except oracle.NoFeasibleTourError:
        return None


def _run_instance(path, methods, seeds, settings, best_known_map):
    inst = load_instance(path)
    if best_known_map is None:
        best = oracle_best_known(inst)
    else:
        best = best_known_map.get(inst.name)
    rows = []
    for method in methods:
        for seed in seeds:
            cost, elapsed = solve_cell(inst, method, seed, settings)
            g = gap(cost, best) if cost is not None and best is not None and best > 0 else None
            rows.append(BenchRow(inst.name, method, seed, cost, best, g,
                                 int(round(elapsed * 1000)) if settings.record_time else None,
                                 cost is not None))
    return rows


def run_bench(instances: Sequence[str | Path], methods: Sequence[str], seeds: Sequence[int],
              settings: BenchSettings = BenchSettings(), best_known: dict[str, float] | None = None,
              workers: int = 1) -> list[BenchRow]:
    """Rows come back in (instance, method, seed) order regardless of ``workers``."""
    for m in methods:
        validate_method(m)
    args = [(p, tuple(methods), tuple(seeds), settings, best_known) for p in instances]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            batches = list(pool.map(_run_instance, *zip(*args)))
    else:
        batches = [_run_instance(*a) for a in args]
    rows = [row for batch in batches for row in batch]
    missing = sorted({r.instance for r in rows if r.best_known is None})
    if missing:
        log.warning("no best-known cost for %d instance(s), gap left empty: %s",
                    len(missing), ", ".join(missing[:5]) + (" ..." if len(missing) > 5 else ""))
    return rows


def rows_to_csv(rows: Iterable[BenchRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(ROW_FIELDS)
    for row in rows:
        writer.writerow(row.as_csv())
    return buf.getvalue()


def mean_std(values: Sequence[float]) -> str:
    if not values:
        return "-"
    if len(values) == 1:
        return f"{values[0]:.2f}"
    return f"{statistics.fmean(values):.2f} ± {statistics.stdev(values):.2f}"


def summarize(rows: Sequence[BenchRow]) -> list[dict]:
    """Per-method aggregates in the ``mean ± std`` style."""
    out = []
    for method in dict.fromkeys(r.method for r in rows):
        mine = [r for r in rows if r.method == method]
        gaps = [r.gap_pct for r in mine if r.gap_pct is not None]
        times = [r.time_ms / 1000 for r in mine if r.time_ms is not None]
        out.append({
            "method": method,
            "cells": len(mine),
            "gap_pct": mean_std(gaps),
            "time_s": mean_std(times),
            "success": f"{sum(r.success for r in mine) / len(mine):.2f}",
        })
    return out


def summary_to_csv(summary: Sequence[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=["method", "cells", "gap_pct", "time_s", "success"],
                            lineterminator="\n")
    writer.writeheader()
    writer.writerows(summary)
    return buf.getvalue()
