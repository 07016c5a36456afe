"""GRASP driver: randomized construction plus descent, repeated under a budget."""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .construction import DEFAULT_PARAMS, METHODS, construct
from .local_search import DEFAULT_NEIGHBORHOODS, MoveKind, descent
from .model import Instance, TatspError, Tour, tour_cost
from .subsolver import SubsolverConfig


class NoSolutionError(TatspError):
    """Every construction attempt failed."""

    def __init__(self, iterations: int, failures: int):
        self.iterations = iterations
        self.failures = failures
        super().__init__(f"no feasible tour after {iterations} iterations ({failures} construction failures)")


@dataclass(frozen=True)
class GraspConfig:
    construction: str = "mip-bias"
    alpha: float | None = None  # None -> tuned default of the construction method
    beta: float | None = None
    neighborhoods: tuple[MoveKind, ...] = DEFAULT_NEIGHBORHOODS
    time_limit: float = 60.0
    subsolver_time_limit: float | None = 2.0
    max_iterations: int | None = None
    seed: int = 0
    parallel_workers: int = 1
    pool_size: int = 10
    subsolver_starts: int | None = None

    def __post_init__(self):
        if self.construction not in METHODS:
            raise ValueError(f"unknown construction {self.construction!r}")
        if not self.time_limit > 0:
            raise ValueError("time_limit must be positive")
        if not self.neighborhoods:
            raise ValueError("at least one neighborhood is required")
        if self.parallel_workers < 1:
            raise ValueError("parallel_workers must be at least 1")
        if self.max_iterations is not None and self.max_iterations < 1:
            raise ValueError("max_iterations must be positive")

    @property
    def params(self) -> tuple[float, float]:
        alpha, beta = DEFAULT_PARAMS[self.construction]
        return (alpha if self.alpha is None else self.alpha,
                beta if self.beta is None else self.beta)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["neighborhoods"] = [k.value for k in self.neighborhoods]
        d["alpha"], d["beta"] = self.params
        return d


@dataclass(frozen=True)
class Trial:
    iteration: int
    construction_cost: float
    post_descent_cost: float
    elapsed: float


@dataclass
class GraspResult:
    best_tour: Tour
    best_cost: float
    iterations: int
    construction_failures: int
    history: list[Trial] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "best_tour": list(self.best_tour),
            "best_cost": self.best_cost,
            "iterations": self.iterations,
            "construction_failures": self.construction_failures,
            "history": [asdict(t) for t in self.history],
        }


def iteration_rng(seed: int, iteration: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, iteration])))


def run_iteration(inst: Instance, cfg: GraspConfig, iteration: int):
    """One construction + descent; returns ``(tour, construction_cost, final_cost)`` or None."""
    rng = iteration_rng(cfg.seed, iteration)
    alpha, beta = cfg.params
    sub = SubsolverConfig(time_limit=cfg.subsolver_time_limit, pool_size=cfg.pool_size,
                          starts=cfg.subsolver_starts)
    tour = construct(inst, cfg.construction, rng, alpha, beta, sub)
    if tour is None:
        return None
    built = tour_cost(inst, tour)
    tour = descent(inst, tour, cfg.neighborhoods)
    return tour, built, tour_cost(inst, tour)


def _run_batch(inst, cfg, iterations):
    return [run_iteration(inst, cfg, i) for i in iterations]


def run(inst: Instance, cfg: GraspConfig = GraspConfig()) -> GraspResult:
    """Iterate until ``max_iterations`` or ``time_limit`` seconds, keeping the best tour.

    Iteration ``i`` draws from its own generator seeded by ``(cfg.seed, i)``,
    and results are merged in iteration order, so the workers setting does not
    change the outcome under an iteration cap.
    """
    start = time.perf_counter()
    deadline = start + cfg.time_limit
    limit = cfg.max_iterations if cfg.max_iterations is not None else math.inf
    best_tour, best_cost = None, math.inf
    failures = 0
    done = 0
    history: list[Trial] = []

    def merge(i, outcome):
        nonlocal best_tour, best_cost, failures
        if outcome is None:
            failures += 1
            return
        tour, built, final = outcome
        history.append(Trial(i, built, final, time.perf_counter() - start))
        if final < best_cost:
            best_tour, best_cost = tour, final

    if cfg.parallel_workers == 1:
        while done < limit and time.perf_counter() < deadline:
            merge(done, run_iteration(inst, cfg, done))
            done += 1
    else:
        workers = cfg.parallel_workers
        with ProcessPoolExecutor(max_workers=workers) as pool:
            while done < limit and time.perf_counter() < deadline:
                wave = int(min(workers * 4, limit - done))
                chunks = [list(range(done + w, done + wave, workers)) for w in range(workers)]
                futures = [pool.submit(_run_batch, inst, cfg, c) for c in chunks if c]
                outcomes = {}
                for chunk, fut in zip(chunks, futures):
                    outcomes.update(zip(chunk, fut.result()))
                for i in range(done, done + wave):
                    merge(i, outcomes[i])
                done += wave

    if best_tour is None:
        raise NoSolutionError(done, failures)
    return GraspResult(best_tour, best_cost, done, failures, history)
