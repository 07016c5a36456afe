"""2-Opt, Swap and Relocate neighbourhoods with first-improvement descent.

Moves are scored by re-evaluating the whole tour. Trigger effects can change
the cost of arcs far from the edited positions, so there is no cheap local
delta to exploit.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterator, Sequence

from .model import InfeasibleTourError, Instance, Tour, tour_cost

IMPROVEMENT_EPS = 1e-9


class MoveKind(enum.Enum):
    TWO_OPT = "twoopt"
    SWAP = "swap"
    RELOCATE = "relocate"


DEFAULT_NEIGHBORHOODS = (MoveKind.TWO_OPT, MoveKind.SWAP, MoveKind.RELOCATE)


@dataclass(frozen=True)
class Move:
    """``TWO_OPT(i, j)`` reverses positions ``i+1..j``; ``SWAP(i, j)`` exchanges two
    positions; ``RELOCATE(i, j)`` moves the node at ``i`` to just after position ``j``."""

    kind: MoveKind
    i: int
    j: int


def parse_neighborhoods(spec: str) -> tuple[MoveKind, ...]:
    """``"twoopt,swap,relocate"`` -> ordered kinds."""
    names = [s.strip().lower() for s in spec.split(",") if s.strip()]
    if not names:
        raise ValueError("at least one neighborhood is required")
    kinds = []
    for name in names:
        try:
            kind = MoveKind(name)
        except ValueError:
            raise ValueError(f"unknown neighborhood {name!r}") from None
        if kind in kinds:
            raise ValueError(f"neighborhood {name!r} listed twice")
        kinds.append(kind)
    return tuple(kinds)


def enumerate_moves(tour: Sequence[int], kind: MoveKind) -> Iterator[Move]:
    n = len(tour)
    if kind is MoveKind.TWO_OPT:
        for i in range(n - 2):
            # arcs i and n-1 share the depot when i == 0
            for j in range(i + 2, n if i > 0 else n - 1):
                yield Move(kind, i, j)
    elif kind is MoveKind.SWAP:
        for i in range(1, n):
            for j in range(i + 1, n):
                yield Move(kind, i, j)
    elif kind is MoveKind.RELOCATE:
        for i in range(1, n):
            for j in range(n):
                if j != i and j != i - 1:
                    yield Move(kind, i, j)
    else:
        raise ValueError(kind)


def apply_move(tour: Sequence[int], m: Move) -> Tour:
    n = len(tour)
    t = list(tour)
    if m.kind is MoveKind.TWO_OPT:
        if not (0 <= m.i and m.i + 2 <= m.j < n):
            raise IndexError(f"invalid 2-Opt move {m} for length {n}")
        t[m.i + 1:m.j + 1] = reversed(t[m.i + 1:m.j + 1])
    elif m.kind is MoveKind.SWAP:
        if not (1 <= m.i < n and 1 <= m.j < n and m.i != m.j):
            raise IndexError(f"invalid swap {m} for length {n}")
        t[m.i], t[m.j] = t[m.j], t[m.i]
    else:
        if not (1 <= m.i < n and 0 <= m.j < n and m.j not in (m.i, m.i - 1)):
            raise IndexError(f"invalid relocate {m} for length {n}")
        node = t.pop(m.i)
        anchor = m.j if m.j < m.i else m.j - 1
        t.insert(anchor + 1, node)
    return tuple(t)


def evaluate_move(inst: Instance, tour: Sequence[int], m: Move,
                  current_cost: float | None = None) -> float | None:
    """Cost change of ``m`` by full re-evaluation, or ``None`` if it uses a missing arc."""
    if current_cost is None:
        current_cost = tour_cost(inst, tour)
    try:
        return tour_cost(inst, apply_move(tour, m)) - current_cost
    except InfeasibleTourError:
        return None


def descent(inst: Instance, tour: Sequence[int],
            kinds: Sequence[MoveKind] = DEFAULT_NEIGHBORHOODS) -> Tour:
    """Multi-neighbourhood first improvement.

    After every accepted move the scan restarts at the first neighbourhood; it
    stops once no neighbourhood holds a move improving by more than
    ``IMPROVEMENT_EPS``.
    """
    if not kinds:
        raise ValueError("at least one neighborhood is required")
    current = tuple(tour)
    cost = tour_cost(inst, current)
    improved = True
    while improved:
        improved = False
        for kind in kinds:
            for m in enumerate_moves(current, kind):
                candidate = apply_move(current, m)
                try:
                    new_cost = tour_cost(inst, candidate)
                except InfeasibleTourError:
                    continue
                if new_cost - cost < -IMPROVEMENT_EPS:
                    current, cost = candidate, new_cost
                    improved = True
                    break
            if improved:
                break
    return current


def improving_moves(inst: Instance, tour: Sequence[int],
                    kinds: Sequence[MoveKind] = DEFAULT_NEIGHBORHOODS) -> list[tuple[Move, float]]:
    """Exhaustive scan for moves improving by more than ``IMPROVEMENT_EPS``."""
    cost = tour_cost(inst, tour)
    found = []
    for kind in kinds:
        for m in enumerate_moves(tour, kind):
            delta = evaluate_move(inst, tour, m, cost)
            if delta is not None and delta < -IMPROVEMENT_EPS:
                found.append((m, delta))
    return found
