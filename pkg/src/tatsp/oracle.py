"""Ground truth for small instances.

Nothing here reuses the evaluator in :mod:`tatsp.model`. The activation
conditions are checked literally for every relation:

1. trigger and target arcs are both in the tour,
2. the trigger precedes the target,
3. no other trigger of the same target lies strictly between them.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .model import CapabilityError, InfeasibleTourError, Instance, Tour

MAX_NODES = 10


class NoFeasibleTourError(InfeasibleTourError):
    pass


@dataclass(frozen=True)
class OracleResult:
    best_tour: Tour
    best_cost: float
    enumerated: int


def _arc_positions(inst: Instance, tour: Sequence[int]) -> dict[tuple[int, int], int]:
    n = inst.node_count
    if len(tour) != n or tour[0] != 0 or set(tour) != set(range(n)):
        raise InfeasibleTourError(f"not a Hamiltonian cycle from the depot: {list(tour)}")
    existing = {(a.tail, a.head) for a in inst.arcs}
    positions = {}
    for p in range(n):
        pair = (tour[p], tour[(p + 1) % n])
        if pair not in existing:
            raise InfeasibleTourError(f"arc {pair} does not exist")
        positions[pair] = p
    return positions


def definitional_evaluate(inst: Instance, tour: Sequence[int]) -> float:
    positions = _arc_positions(inst, tour)

    def pos(arc_id):
        a = inst.arcs[arc_id]
        return positions.get((a.tail, a.head))

    replaced: dict[int, float] = {}
    for r, rel in enumerate(inst.relations):
        p_trig, p_targ = pos(rel.trigger), pos(rel.target)
        if p_trig is None or p_targ is None:
            continue
        if not p_trig < p_targ:
            continue
        overridden = False
        for r2, other in enumerate(inst.relations):
            if r2 == r or other.target != rel.target:
                continue
            p_other = pos(other.trigger)
            if p_other is not None and p_trig < p_other < p_targ:
                overridden = True
                break
        if not overridden:
            replaced[p_targ] = rel.cost

    n = inst.node_count
    total = 0.0
    for p in range(n):
        pair = (tour[p], tour[(p + 1) % n])
        if p in replaced:
            total += replaced[p]
        else:
            total += next(a.cost for a in inst.arcs if (a.tail, a.head) == pair)
    return total


def _batch_costs(inst: Instance, tours: np.ndarray) -> np.ndarray:
    """Definitional cost of each row of ``tours`` (depot first); ``inf`` if infeasible.

    Same three conditions as :func:`definitional_evaluate`, vectorized over tours.
    """
    m, n = tours.shape
    arc_id = np.full((n, n), -1, dtype=np.int64)
    base = np.array([a.cost for a in inst.arcs] + [0.0])
    for k, a in enumerate(inst.arcs):
        arc_id[a.tail, a.head] = k
    rows = np.arange(m)
    succ = np.empty_like(tours)
    node_pos = np.empty_like(tours)
    for p in range(n):
        succ[rows, tours[:, p]] = tours[:, (p + 1) % n]
        node_pos[rows, tours[:, p]] = p

    pos_arcs = np.stack([arc_id[tours[:, p], tours[:, (p + 1) % n]] for p in range(n)], axis=1)
    feasible = (pos_arcs >= 0).all(axis=1)
    costs = base[pos_arcs]

    tails = np.array([a.tail for a in inst.arcs], dtype=np.int64)
    heads = np.array([a.head for a in inst.arcs], dtype=np.int64)

    def arc_pos(k):
        in_tour = succ[:, tails[k]] == heads[k]
        return np.where(in_tour, node_pos[:, tails[k]], -1)

    cache: dict[int, np.ndarray] = {}

    def cached_pos(k):
        if k not in cache:
            cache[k] = arc_pos(k)
        return cache[k]

    rivals: dict[int, list[int]] = {}
    for r, rel in enumerate(inst.relations):
        rivals.setdefault(rel.target, []).append(r)

    for r, rel in enumerate(inst.relations):
        p_trig, p_targ = cached_pos(rel.trigger), cached_pos(rel.target)
        active = (p_trig >= 0) & (p_targ >= 0) & (p_trig < p_targ)
        for r2 in rivals[rel.target]:
            if r2 == r:
                continue
            other = inst.relations[r2]
            p_other = cached_pos(other.trigger)
            active &= ~((p_other >= 0) & (p_trig < p_other) & (p_other < p_targ))
        hit = np.nonzero(active)[0]
        costs[hit, p_targ[hit]] = rel.cost

    total = np.zeros(m)
    for p in range(n):
        total = total + costs[:, p]
    total[~feasible] = np.inf
    return total


def definitional_evaluate_many(inst: Instance, tours: Sequence[Sequence[int]]) -> np.ndarray:
    arr = np.asarray(tours, dtype=np.int64).reshape(len(tours), inst.node_count)
    return _batch_costs(inst, arr)


def brute_force_optimum(inst: Instance, chunk: int = 40320) -> OracleResult:
    """Enumerate every cycle from the depot; ties go to the lexicographically smallest tour."""
    n = inst.node_count
    if n > MAX_NODES:
        raise CapabilityError(f"brute force is limited to {MAX_NODES} nodes, got {n}")
    perms = itertools.permutations(range(1, n))
    best_cost, best_tour, enumerated = np.inf, None, 0
    while True:
        block = list(itertools.islice(perms, chunk))
        if not block:
            break
        tours = np.zeros((len(block), n), dtype=np.int64)
        tours[:, 1:] = block
        costs = _batch_costs(inst, tours)
        enumerated += int(np.isfinite(costs).sum())
        i = int(np.argmin(costs))
        # permutations come in lexicographic order, so a strict improvement keeps the first tie
        if costs[i] < best_cost:
            best_cost, best_tour = float(costs[i]), tuple(int(v) for v in tours[i])
    if best_tour is None:
        raise NoFeasibleTourError(f"instance {inst.name!r} has no Hamiltonian cycle")
    return OracleResult(best_tour, best_cost, enumerated)
