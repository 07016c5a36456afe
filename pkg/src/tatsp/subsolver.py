"""Relation-free TSP solving on per-arc cost vectors.

Construction heuristics hand a perturbed cost per arc to this module and get
back a pool of cheap Hamiltonian cycles. Small instances are solved exactly
with Held-Karp; everything else goes through multi-start nearest neighbour
followed by directed 2-Opt.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .model import CapabilityError, InfeasibleTourError, Instance, Tour

HELD_KARP_MAX_NODES = 16


@dataclass(frozen=True)
class SubsolverConfig:
    time_limit: float | None = 2.0
    pool_size: int = 10
    starts: int | None = None  # multi-start cap, defaults to max(10, 2n)
    exact_max_nodes: int = 13


@dataclass
class TourPool:
    tours: list[Tour] = field(default_factory=list)
    costs: list[float] = field(default_factory=list)

    def __len__(self):
        return len(self.tours)

    def __bool__(self):
        return bool(self.tours)

    @classmethod
    def from_candidates(cls, candidates: dict[Tour, float], size: int) -> TourPool:
        ranked = sorted(candidates.items(), key=lambda kv: (kv[1], kv[0]))[:size]
        return cls([t for t, _ in ranked], [c for _, c in ranked])

    def merge(self, other: TourPool, size: int) -> TourPool:
        candidates = dict(zip(self.tours, self.costs))
        candidates.update(zip(other.tours, other.costs))
        return TourPool.from_candidates(candidates, size)


def dense_costs(inst: Instance, cm) -> np.ndarray:
    """n x n matrix of ``cm`` with ``inf`` for missing arcs."""
    n = inst.node_count
    mat = np.full((n, n), np.inf)
    for k, a in enumerate(inst.arcs):
        mat[a.tail, a.head] = cm[k]
    return mat


def cycle_cost(mat: np.ndarray, tour) -> float:
    total = 0.0
    n = len(tour)
    for p in range(n):
        total += mat[tour[p], tour[(p + 1) % n]]
    return float(total)


def held_karp(inst: Instance, cm) -> Tour:
    """Minimum-cost Hamiltonian cycle from the depot under ``cm``."""
    n = inst.node_count
    if n > HELD_KARP_MAX_NODES:
        raise CapabilityError(f"Held-Karp is limited to {HELD_KARP_MAX_NODES} nodes, got {n}")
    mat = dense_costs(inst, cm)
    if n == 2:
        if not np.isfinite(mat[0, 1] + mat[1, 0]):
            raise InfeasibleTourError("no Hamiltonian cycle")
        return (0, 1)

    k = n - 1  # customers 1..n-1 are bits 0..k-1
    inner = mat[1:, 1:]
    full = (1 << k) - 1
    dp = np.full((1 << k, k), np.inf)
    parent = np.full((1 << k, k), -1, dtype=np.int64)
    for j in range(k):
        dp[1 << j, j] = mat[0, j + 1]
    bits = 1 << np.arange(k)
    for mask in range(1, full):
        row = dp[mask]
        if not np.isfinite(row).any():
            continue
        cand = row[:, None] + inner
        best_prev = np.argmin(cand, axis=0)
        best = cand[best_prev, np.arange(k)]
        free = np.nonzero((mask & bits) == 0)[0]
        new_masks = mask | bits[free]
        better = best[free] < dp[new_masks, free]
        if better.any():
            nm, nj = new_masks[better], free[better]
            dp[nm, nj] = best[free][better]
            parent[nm, nj] = best_prev[free][better]

    closing = dp[full] + mat[1:, 0]
    last = int(np.argmin(closing))
    if not np.isfinite(closing[last]):
        raise InfeasibleTourError("no Hamiltonian cycle")
    path = []
    mask, j = full, last
    while j >= 0:
        path.append(j + 1)
        prev = int(parent[mask, j])
        mask ^= 1 << j
        j = prev
    return (0, *reversed(path))


def nearest_neighbor(mat: np.ndarray, first: int) -> Tour | None:
    """Greedy path 0 -> first -> cheapest unvisited ...; None on a dead end."""
    n = len(mat)
    if not np.isfinite(mat[0, first]):
        return None
    tour = [0, first]
    free = np.ones(n, dtype=bool)
    free[0] = free[first] = False
    for _ in range(n - 2):
        row = np.where(free, mat[tour[-1]], np.inf)
        nxt = int(np.argmin(row))
        if not np.isfinite(row[nxt]):
            return None
        tour.append(nxt)
        free[nxt] = False
    if not np.isfinite(mat[tour[-1], 0]):
        return None
    return tuple(tour)


def two_opt(mat: np.ndarray, tour: Tour, eps: float = 1e-9) -> Tour:
    """First-improvement directed 2-Opt with O(1) move deltas via prefix sums."""
    t = list(tour)
    n = len(t)
    if n < 4:
        return tuple(t)
    while True:
        seq = t + [0]
        fwd = mat[seq[:-1], seq[1:]]
        back = mat[seq[1:], seq[:-1]]
        missing = ~np.isfinite(back)
        back_prefix = np.concatenate(([0.0], np.cumsum(np.where(missing, 0.0, back))))
        fwd_prefix = np.concatenate(([0.0], np.cumsum(fwd)))
        miss_prefix = np.concatenate(([0], np.cumsum(missing)))
        improved = False
        for i in range(n - 2):
            for j in range(i + 2, n if i > 0 else n - 1):
                # reverse seq[i+1..j]; arcs i+1..j-1 flip direction
                if miss_prefix[j] - miss_prefix[i + 1]:
                    continue
                new_in = mat[seq[i], seq[j]]
                new_out = mat[seq[i + 1], seq[j + 1]]
                if not (np.isfinite(new_in) and np.isfinite(new_out)):
                    continue
                delta = (new_in + new_out - fwd[i] - fwd[j]
                         + (back_prefix[j] - back_prefix[i + 1])
                         - (fwd_prefix[j] - fwd_prefix[i + 1]))
                if delta < -eps:
                    t[i + 1:j + 1] = reversed(t[i + 1:j + 1])
                    improved = True
                    break
            if improved:
                break
        if not improved:
            return tuple(t)


def heuristic_pool(inst: Instance, cm, pool_size: int = 10, time_limit: float | None = None,
                   rng: np.random.Generator | None = None, starts: int | None = None) -> TourPool:
    """Best distinct tours seen over nearest-neighbour starts and their 2-Opt optima.

    Stops after ``starts`` starts or ``time_limit`` seconds, whichever comes
    first; without a time limit the result is a pure function of the seed.
    """
    if pool_size < 1:
        raise ValueError("pool_size must be positive")
    rng = rng if rng is not None else np.random.default_rng(0)
    mat = dense_costs(inst, cm)
    n = inst.node_count
    starts = starts if starts is not None else max(10, 2 * n)
    firsts = [j for j in range(1, n) if np.isfinite(mat[0, j])]
    if not firsts:
        return TourPool()
    order = [firsts[i] for i in rng.permutation(len(firsts))]
    seen: dict[Tour, float] = {}
    t0 = time.perf_counter()
    for s in range(starts):
        if time_limit is not None and s > 0 and time.perf_counter() - t0 > time_limit:
            break
        tour = nearest_neighbor(mat, order[s % len(order)])
        if s >= len(order) and tour is not None:
            # later rounds perturb the greedy start with a random segment reversal
            tour = _kick(mat, tour, rng)
        if tour is None:
            continue
        seen[tour] = cycle_cost(mat, tour)
        tour = two_opt(mat, tour)
        seen[tour] = cycle_cost(mat, tour)
    return TourPool.from_candidates(seen, pool_size)


def _kick(mat: np.ndarray, tour: Tour, rng: np.random.Generator) -> Tour | None:
    n = len(tour)
    if n < 4:
        return tour
    i, j = sorted(rng.choice(np.arange(1, n), size=2, replace=False).tolist())
    kicked = tour[:i] + tour[i:j + 1][::-1] + tour[j + 1:]
    return kicked if np.isfinite(cycle_cost(mat, kicked)) else tour


def solve_pool(inst: Instance, cm, cfg: SubsolverConfig | None = None,
               rng: np.random.Generator | None = None) -> TourPool:
    """Dispatcher used by the construction heuristics.

    Up to ``cfg.exact_max_nodes`` nodes the exact Held-Karp tour is merged
    into the heuristic pool so the pool always holds the optimum under ``cm``.
    """
    cfg = cfg or SubsolverConfig()
    pool = heuristic_pool(inst, cm, cfg.pool_size, cfg.time_limit, rng, cfg.starts)
    if inst.node_count <= cfg.exact_max_nodes:
        try:
            best = held_karp(inst, cm)
        except InfeasibleTourError:
            return pool
        exact = TourPool([best], [cycle_cost(dense_costs(inst, cm), best)])
        pool = exact.merge(pool, cfg.pool_size)
    return pool
