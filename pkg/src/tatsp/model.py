"""Instance and tour data model, path-dependent tour evaluation and the gap metric.

A relation ``(trigger, target, cost)`` replaces the base cost of the target arc
when it is active. For a target arc at tour position ``p`` the active relation
is the one whose trigger sits at the largest tour position strictly below
``p``. Arc positions are the positions of their tails, so the closing arc
``(last, 0)`` has position ``node_count - 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

Tour = tuple[int, ...]


class TatspError(Exception):
    """Base class for package errors."""


class InstanceFormatError(TatspError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"{message}, line {line}"
        super().__init__(message)


class InvalidInstanceError(TatspError):
    pass


class InfeasibleTourError(TatspError):
    pass


class CapabilityError(TatspError):
    """Input is valid but beyond what a routine is built to handle."""


@dataclass(frozen=True)
class Arc:
    tail: int
    head: int
    cost: float


@dataclass(frozen=True)
class Relation:
    trigger: int
    target: int
    cost: float


@dataclass(frozen=True, eq=False)
class Instance:
    """A TA-TSP instance. Build through :meth:`build` or :func:`parse_instance`."""

    node_count: int
    arcs: tuple[Arc, ...]
    relations: tuple[Relation, ...]
    name: str = ""
    arc_index: dict[tuple[int, int], int] = field(init=False, repr=False)
    relations_by_target: tuple[tuple[int, ...], ...] = field(init=False, repr=False)
    relations_by_trigger: tuple[tuple[int, ...], ...] = field(init=False, repr=False)
    base_costs: tuple[float, ...] = field(init=False, repr=False)

    def __post_init__(self):
        if self.node_count < 2:
            raise InvalidInstanceError("node_count must be at least 2")
        index: dict[tuple[int, int], int] = {}
        for k, arc in enumerate(self.arcs):
            if not (0 <= arc.tail < self.node_count and 0 <= arc.head < self.node_count):
                raise InvalidInstanceError(f"arc {k} references an unknown node")
            if arc.tail == arc.head:
                raise InvalidInstanceError(f"arc {k} is a self-loop")
            if not arc.cost >= 0 or math.isinf(arc.cost):
                raise InvalidInstanceError(f"arc {k} has invalid cost {arc.cost}")
            if (arc.tail, arc.head) in index:
                raise InvalidInstanceError(f"duplicate arc ({arc.tail}, {arc.head})")
            index[arc.tail, arc.head] = k

        by_target: list[list[int]] = [[] for _ in self.arcs]
        by_trigger: list[list[int]] = [[] for _ in self.arcs]
        seen: set[tuple[int, int]] = set()
        m = len(self.arcs)
        for r, rel in enumerate(self.relations):
            if not (0 <= rel.trigger < m and 0 <= rel.target < m):
                raise InvalidInstanceError(f"dangling relation reference in relation {r}")
            if rel.trigger == rel.target:
                raise InvalidInstanceError(f"relation {r} is a self-relation")
            if not rel.cost >= 0 or math.isinf(rel.cost):
                raise InvalidInstanceError(f"relation {r} has invalid cost {rel.cost}")
            if (rel.trigger, rel.target) in seen:
                raise InvalidInstanceError(f"duplicate relation ({rel.trigger}, {rel.target})")
            seen.add((rel.trigger, rel.target))
            by_target[rel.target].append(r)
            by_trigger[rel.trigger].append(r)

        object.__setattr__(self, "arc_index", index)
        object.__setattr__(self, "relations_by_target", tuple(map(tuple, by_target)))
        object.__setattr__(self, "relations_by_trigger", tuple(map(tuple, by_trigger)))
        object.__setattr__(self, "base_costs", tuple(float(a.cost) for a in self.arcs))

    @classmethod
    def build(cls, node_count: int, arcs: Iterable[tuple[int, int, float]],
              relations: Iterable[tuple[int, int, float]] = (), name: str = "") -> Instance:
        """Build from plain ``(tail, head, cost)`` and ``(trigger, target, cost)`` tuples."""
        return cls(
            node_count,
            tuple(Arc(int(t), int(h), float(c)) for t, h, c in arcs),
            tuple(Relation(int(a), int(b), float(c)) for a, b, c in relations),
            name,
        )

    @property
    def arc_count(self) -> int:
        return len(self.arcs)

    def successors(self, node: int) -> list[int]:
        return [a.head for a in self.arcs if a.tail == node]

    def arc(self, tail: int, head: int) -> int | None:
        return self.arc_index.get((tail, head))


@dataclass(frozen=True)
class TourEvaluation:
    total_cost: float
    arc_costs: tuple[float, ...]
    active_relations: tuple[int | None, ...]
    arcs: tuple[int, ...]


# -- file formats ----------------------------------------------------------

def _content_lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line.split()


def parse_instance(text: str, name: str = "") -> Instance:
    """Parse the line-oriented ``TATSP 1`` instance format."""
    lines = list(_content_lines(text))
    if not lines or lines[0][1] != ["TATSP", "1"]:
        raise InstanceFormatError("malformed header, expected 'TATSP 1'", lines[0][0] if lines else 1)
    if len(lines) < 2 or len(lines[1][1]) != 3:
        raise InstanceFormatError("malformed header, expected '<N> <M> <K>'", lines[1][0] if len(lines) > 1 else 2)
    lineno, fields = lines[1]
    try:
        n, m, k = (int(x) for x in fields)
    except ValueError:
        raise InstanceFormatError("malformed header, counts must be integers", lineno) from None
    if n < 2 or m < 0 or k < 0:
        raise InstanceFormatError("malformed header, invalid counts", lineno)
    body = lines[2:]
    if len(body) != m + k:
        raise InstanceFormatError(
            f"expected {m} arc and {k} relation lines, found {len(body)} content lines",
            body[-1][0] if body else lineno)

    arcs: list[Arc] = []
    index: dict[tuple[int, int], int] = {}
    for lineno, fields in body[:m]:
        if len(fields) != 4 or fields[0] != "A":
            raise InstanceFormatError("malformed arc line, expected 'A <tail> <head> <cost>'", lineno)
        try:
            tail, head, cost = int(fields[1]), int(fields[2]), float(fields[3])
        except ValueError:
            raise InstanceFormatError("malformed arc line", lineno) from None
        if not (0 <= tail < n and 0 <= head < n):
            raise InstanceFormatError("unknown node id", lineno)
        if tail == head:
            raise InstanceFormatError("self-loop arc", lineno)
        if (tail, head) in index:
            raise InstanceFormatError("duplicate arc", lineno)
        if not cost >= 0 or math.isinf(cost):
            raise InstanceFormatError("arc cost must be finite and nonnegative", lineno)
        index[tail, head] = len(arcs)
        arcs.append(Arc(tail, head, cost))

    relations: list[Relation] = []
    pairs: set[tuple[int, int]] = set()
    for lineno, fields in body[m:]:
        if len(fields) != 4 or fields[0] != "R":
            raise InstanceFormatError("malformed relation line, expected 'R <trigger> <target> <cost>'", lineno)
        try:
            trig, targ, cost = int(fields[1]), int(fields[2]), float(fields[3])
        except ValueError:
            raise InstanceFormatError("malformed relation line", lineno) from None
        if not (0 <= trig < m and 0 <= targ < m):
            raise InstanceFormatError("dangling relation reference", lineno)
        if trig == targ:
            raise InstanceFormatError("self-relation", lineno)
        if (trig, targ) in pairs:
            raise InstanceFormatError("duplicate relation", lineno)
        if not cost >= 0 or math.isinf(cost):
            raise InstanceFormatError("relation cost must be finite and nonnegative", lineno)
        pairs.add((trig, targ))
        relations.append(Relation(trig, targ, cost))

    return Instance(n, tuple(arcs), tuple(relations), name)


def format_instance(inst: Instance) -> str:
    out = ["TATSP 1", f"{inst.node_count} {inst.arc_count} {len(inst.relations)}"]
    out += [f"A {a.tail} {a.head} {a.cost!r}" for a in inst.arcs]
    out += [f"R {r.trigger} {r.target} {r.cost!r}" for r in inst.relations]
    return "\n".join(out) + "\n"


def load_instance(path: str | Path) -> Instance:
    path = Path(path)
    return parse_instance(path.read_text(), name=path.stem)


def save_instance(inst: Instance, path: str | Path) -> None:
    Path(path).write_text(format_instance(inst))


def format_cost(cost: float) -> str:
    """Shortest text that parses back to exactly ``cost``."""
    cost = float(cost)
    return str(int(cost)) if cost.is_integer() and abs(cost) < 1e15 else repr(cost)


def format_solution(tour: Sequence[int], cost: float) -> str:
    return " ".join(map(str, tour)) + f"\ncost {format_cost(cost)}\n"


def parse_solution(text: str) -> tuple[Tour, float | None]:
    """Return ``(tour, reported_cost)``; the cost line is optional."""
    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise InstanceFormatError("empty solution file", 1)
    try:
        tour = tuple(int(x) for x in lines[0].split())
    except ValueError:
        raise InstanceFormatError("malformed node sequence", 1) from None
    cost = None
    if len(lines) > 1:
        parts = lines[1].split()
        if len(parts) != 2 or parts[0] != "cost":
            raise InstanceFormatError("malformed cost line, expected 'cost <value>'", 2)
        try:
            cost = float(parts[1])
        except ValueError:
            raise InstanceFormatError("malformed cost value", 2) from None
    return tour, cost


# -- evaluation ------------------------------------------------------------

def tour_arcs(inst: Instance, tour: Sequence[int]) -> tuple[int, ...]:
    """Arc indices of the tour in traversal order, closing arc last.

    Raises :class:`InfeasibleTourError` unless the tour is a depot-anchored
    permutation whose arcs all exist.
    """
    n = inst.node_count
    if len(tour) != n or tour[0] != 0 or sorted(tour) != list(range(n)):
        raise InfeasibleTourError(f"not a permutation of 0..{n - 1} starting at 0: {list(tour)}")
    arcs = []
    for p in range(n):
        u, v = tour[p], tour[(p + 1) % n]
        a = inst.arc_index.get((u, v))
        if a is None:
            raise InfeasibleTourError(f"tour uses missing arc ({u}, {v})")
        arcs.append(a)
    return tuple(arcs)


def is_feasible(inst: Instance, tour: Sequence[int]) -> bool:
    try:
        tour_arcs(inst, tour)
    except InfeasibleTourError:
        return False
    return True


def delta_cost(inst: Instance, r: int) -> float:
    """Relation cost minus the base cost of its target arc."""
    rel = inst.relations[r]
    return rel.cost - inst.base_costs[rel.target]


def evaluate_tour(inst: Instance, tour: Sequence[int]) -> TourEvaluation:
    arcs = tour_arcs(inst, tour)
    position = {a: p for p, a in enumerate(arcs)}
    relations = inst.relations
    costs = []
    active: list[int | None] = []
    for p, a in enumerate(arcs):
        last_pos, last_rel = -1, None
        for r in inst.relations_by_target[a]:
            q = position.get(relations[r].trigger)
            if q is not None and last_pos < q < p:
                last_pos, last_rel = q, r
        active.append(last_rel)
        costs.append(inst.base_costs[a] if last_rel is None else relations[last_rel].cost)
    return TourEvaluation(sum(costs), tuple(costs), tuple(active), arcs)


def tour_cost(inst: Instance, tour: Sequence[int]) -> float:
    return evaluate_tour(inst, tour).total_cost


# -- incremental construction ---------------------------------------------

@dataclass
class PartialState:
    """Open path from the depot, extended one node at a time."""

    sequence: list[int] = field(default_factory=lambda: [0])
    visited: set[int] = field(default_factory=lambda: {0})
    running_cost: float = 0.0
    # target arc -> (position, relation) of the latest trigger placed so far
    last_trigger_by_target: dict[int, tuple[int, int]] = field(default_factory=dict)

    @property
    def last(self) -> int:
        return self.sequence[-1]

    def copy(self) -> PartialState:
        return PartialState(list(self.sequence), set(self.visited), self.running_cost,
                            dict(self.last_trigger_by_target))


def arc_cost_after(inst: Instance, s: PartialState, arc: int) -> float:
    """Effective cost of ``arc`` if appended right after the path in ``s``."""
    hit = s.last_trigger_by_target.get(arc)
    return inst.base_costs[arc] if hit is None else inst.relations[hit[1]].cost


def extend_partial(inst: Instance, s: PartialState, nxt: int) -> tuple[float, PartialState]:
    """Append ``nxt`` to the path; returns ``(incremental_cost, new_state)``.

    Placed arcs all precede the new arc, so only its own cost changes the total.
    """
    if nxt in s.visited:
        raise InfeasibleTourError(f"node {nxt} already visited")
    arc = inst.arc_index.get((s.last, nxt))
    if arc is None:
        raise InfeasibleTourError(f"cannot extend with missing arc ({s.last}, {nxt})")
    inc = arc_cost_after(inst, s, arc)
    new = s.copy()
    position = len(s.sequence) - 1
    for r in inst.relations_by_trigger[arc]:
        new.last_trigger_by_target[inst.relations[r].target] = (position, r)
    new.sequence.append(nxt)
    new.visited.add(nxt)
    new.running_cost = s.running_cost + inc
    return inc, new


def closing_cost(inst: Instance, s: PartialState) -> float:
    """Effective cost of the arc back to the depot once every node is placed."""
    if len(s.sequence) != inst.node_count:
        raise InfeasibleTourError("path does not visit every node yet")
    arc = inst.arc_index.get((s.last, 0))
    if arc is None:
        raise InfeasibleTourError(f"missing closing arc ({s.last}, 0)")
    return arc_cost_after(inst, s, arc)


# -- metrics ---------------------------------------------------------------

def gap(cost: float, best_known: float) -> float:
    """Percentage gap to a best-known cost; negative when ``cost`` beats it."""
    if not best_known > 0:
        raise ValueError(f"best_known must be positive, got {best_known}")
    return 100.0 * (cost - best_known) / best_known
