"""Randomized construction heuristics.

Each heuristic returns a tour or ``None`` when it runs into a dead end, so
callers can count failures without exception handling.
"""

from __future__ import annotations

import math

import numpy as np

from .model import Instance, PartialState, Tour, arc_cost_after, extend_partial, tour_cost
from .subsolver import SubsolverConfig, solve_pool


def _feasible_successors(inst: Instance, s: PartialState) -> list[tuple[int, int]]:
    """``(node, arc)`` pairs that can follow the path; the last node also needs a way home."""
    last_step = len(s.sequence) == inst.node_count - 1
    out = []
    for v in range(inst.node_count):
        if v in s.visited:
            continue
        arc = inst.arc_index.get((s.last, v))
        if arc is None:
            continue
        if last_step and (v, 0) not in inst.arc_index:
            continue
        out.append((v, arc))
    return out


def simple_randomized(inst: Instance, rng: np.random.Generator) -> Tour | None:
    s = PartialState()
    while len(s.sequence) < inst.node_count:
        options = _feasible_successors(inst, s)
        if not options:
            return None
        v, _ = options[int(rng.integers(len(options)))]
        s.sequence.append(v)
        s.visited.add(v)
    return tuple(s.sequence)


def rcl_size(alpha: float, feasible: int) -> int:
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    # float products such as alpha * n can land a hair above an integer
    return max(1, math.ceil(alpha * feasible - 1e-9))


def randomized_greedy(inst: Instance, alpha: float, rng: np.random.Generator) -> Tour | None:
    """Semi-greedy construction with a restricted candidate list of the cheapest extensions.

    Candidates are ranked by exact trigger-aware incremental cost, ties by node
    id; ``alpha=0`` is pure greedy and ``alpha=1`` picks among all candidates.
    """
    s = PartialState()
    while len(s.sequence) < inst.node_count:
        options = _feasible_successors(inst, s)
        if not options:
            return None
        ranked = sorted((arc_cost_after(inst, s, arc), v) for v, arc in options)
        size = rcl_size(alpha, len(ranked))
        _, v = ranked[int(rng.integers(size))] if size > 1 else ranked[0]
        _, s = extend_partial(inst, s, v)
    return tuple(s.sequence)


# -- cost perturbations ----------------------------------------------------

def base_cost_vector(inst: Instance) -> np.ndarray:
    return np.array(inst.base_costs, dtype=float)


def perturb_additive(inst: Instance, alpha: float, rng: np.random.Generator) -> np.ndarray:
    """``c + alpha * U(-1, 1)`` per arc, unclamped."""
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    c = base_cost_vector(inst)
    return c + alpha * rng.uniform(-1.0, 1.0, size=c.shape)


def perturb_multiplicative(inst: Instance, beta: float, rng: np.random.Generator) -> np.ndarray:
    """``c * beta * U(0, 1)`` per arc."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    c = base_cost_vector(inst)
    return c * (beta * rng.uniform(0.0, 1.0, size=c.shape))


def cyclic_distances(order: np.ndarray) -> np.ndarray:
    """Pairwise cyclic distance between nodes placed in the sequence ``order``."""
    n = len(order)
    pos = np.empty(n, dtype=np.int64)
    pos[order] = np.arange(n)
    diff = np.abs(pos[:, None] - pos[None, :])
    return np.minimum(diff, n - diff)


def biased_costs(inst: Instance, alpha: float, beta: float, order: np.ndarray) -> np.ndarray:
    """Penalize both arcs of every relation by ``alpha * p_r * c_r`` given a prior node order.

    Arc usage probability is the inverse cyclic distance of its endpoints in
    ``order``; a relation's activation probability multiplies those of its two
    arcs and divides by the trigger-head to target-tail distance (at least 1)
    raised to ``beta``.
    """
    if alpha < 0 or beta < 0:
        raise ValueError("alpha and beta must be nonnegative")
    c = base_cost_vector(inst)
    if not inst.relations or alpha == 0:
        return c
    d = cyclic_distances(order)
    tails = np.array([a.tail for a in inst.arcs])
    heads = np.array([a.head for a in inst.arcs])
    p_arc = 1.0 / d[tails, heads]
    trig = np.array([r.trigger for r in inst.relations])
    targ = np.array([r.target for r in inst.relations])
    rel_cost = np.array([r.cost for r in inst.relations])
    gap_dist = np.maximum(1, d[heads[trig], tails[targ]])
    p_rel = p_arc[trig] * p_arc[targ] / gap_dist.astype(float) ** beta
    penalty = alpha * p_rel * rel_cost
    out = c.copy()
    np.add.at(out, trig, penalty)
    np.add.at(out, targ, penalty)
    return out


def perturb_biased(inst: Instance, alpha: float, beta: float, rng: np.random.Generator) -> np.ndarray:
    return biased_costs(inst, alpha, beta, rng.permutation(inst.node_count))


def mip_construction(inst: Instance, cm, cfg: SubsolverConfig | None = None,
                     rng: np.random.Generator | None = None) -> Tour | None:
    """Solve the relation-free TSP on ``cm`` and keep the pool tour with the best true cost."""
    pool = solve_pool(inst, cm, cfg, rng)
    if not pool:
        return None
    # min keeps the first (cheapest under cm) tour among equal true costs
    return min(pool.tours, key=lambda t: tour_cost(inst, t))


METHODS = ("src", "rgc", "mip-add", "mip-mul", "mip-bias")

# tuned (alpha, beta) per method; unused slots are ignored by that method
DEFAULT_PARAMS = {
    "src": (0.0, 0.0),
    "rgc": (0.1, 0.0),
    "mip-add": (0.1, 0.0),
    "mip-mul": (0.0, 1.5),
    "mip-bias": (0.1, 3.0),
}


def construct(inst: Instance, method: str, rng: np.random.Generator, alpha: float = 0.1,
              beta: float = 3.0, subsolver: SubsolverConfig | None = None) -> Tour | None:
    """Dispatch by method name; ``alpha``/``beta`` mean what each method makes of them."""
    if method == "src":
        return simple_randomized(inst, rng)
    if method == "rgc":
        return randomized_greedy(inst, alpha, rng)
    if method == "mip-add":
        cm = perturb_additive(inst, alpha, rng)
    elif method == "mip-mul":
        cm = perturb_multiplicative(inst, beta, rng)
    elif method == "mip-bias":
        cm = perturb_biased(inst, alpha, beta, rng)
    else:
        raise ValueError(f"unknown construction method {method!r}; expected one of {METHODS}")
    return mip_construction(inst, cm, subsolver, rng)
