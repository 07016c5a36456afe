"""Position-based MIP model of the TA-TSP: builder, LP-format writer, assignment checker.

Variables
    ``x_i_j``      binary, arc (i, j) is in the tour
    ``u_i``        integer in [0, N-1], position of node i (``u_0 = 0``)
    ``y_r<k>``     binary, relation k is active
    ``z_a<p>_a<q>`` binary, arc p may be taken to precede arc q

The objective charges base costs on ``x`` and each relation's delta cost
(relation cost minus target base cost) on ``y``, which matches the
replacement semantics of the evaluator.

Constraint families, with the row-name prefix used in LP output:

    4a flow_out    4b flow_in       4c mtz        4d start
    4e rel_active  4f rel_trigger   4g rel_prec   4h rel_force
    4i z_prec      4j last_trigger
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Mapping, Sequence, TextIO

from .model import CapabilityError, Instance, TatspError, delta_cost, evaluate_tour

DEFAULT_MAX_CONSTRAINTS = 1_000_000
FEASIBILITY_TOL = 1e-6


@dataclass(frozen=True)
class Variable:
    name: str
    kind: str  # "binary" | "integer"
    lower: float = 0.0
    upper: float = 1.0


@dataclass(frozen=True)
class Constraint:
    name: str
    family: str
    terms: tuple[tuple[str, float], ...]
    sense: str  # "<=" | "="
    rhs: float

    def activity(self, values: Mapping[str, float]) -> float:
        return sum(coef * values[var] for var, coef in self.terms)

    def satisfied(self, values: Mapping[str, float], tol: float = FEASIBILITY_TOL) -> bool:
        lhs = self.activity(values)
        if self.sense == "=":
            return abs(lhs - self.rhs) <= tol
        return lhs <= self.rhs + tol


@dataclass
class Model:
    name: str
    variables: list[Variable] = field(default_factory=list)
    constraints: list[Constraint] = field(default_factory=list)
    objective: list[tuple[str, float]] = field(default_factory=list)

    def count(self, prefix: str) -> int:
        return sum(1 for v in self.variables if v.name.startswith(prefix))

    def family_counts(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for c in self.constraints:
            out[c.family] = out.get(c.family, 0) + 1
        return out


def x_name(inst: Instance, arc: int) -> str:
    a = inst.arcs[arc]
    return f"x_{a.tail}_{a.head}"


def u_name(node: int) -> str:
    return f"u_{node}"


def y_name(r: int) -> str:
    return f"y_r{r}"


def z_name(p: int, q: int) -> str:
    return f"z_a{p}_a{q}"


def _row(name, family, terms, sense, rhs) -> Constraint:
    merged: dict[str, float] = {}
    for var, coef in terms:
        merged[var] = merged.get(var, 0.0) + coef
    return Constraint(name, family, tuple((v, c) for v, c in merged.items() if c != 0), sense, float(rhs))


def expected_row_count(inst: Instance) -> int:
    n, m = inst.node_count, inst.arc_count
    mtz = sum(1 for a in inst.arcs if a.head != 0)
    targets = [len(rs) for rs in inst.relations_by_target if rs]
    k = len(inst.relations)
    return 2 * n + mtz + 1 + len(targets) + 3 * k + m * (m - 1) + sum(t * (t - 1) for t in targets)


def build_model(inst: Instance, max_constraints: int = DEFAULT_MAX_CONSTRAINTS) -> Model:
    rows = expected_row_count(inst)
    if rows > max_constraints:
        raise CapabilityError(
            f"model for {inst.name!r} needs {rows} constraints "
            f"({inst.arc_count} arcs, {len(inst.relations)} relations), cap is {max_constraints}")
    n, m = inst.node_count, inst.arc_count
    model = Model(inst.name)
    X = [x_name(inst, k) for k in range(m)]
    U = [u_name(i) for i in range(n)]
    Y = [y_name(r) for r in range(len(inst.relations))]
    model.variables += [Variable(x, "binary") for x in X]
    model.variables += [Variable(u, "integer", 0.0, float(n - 1)) for u in U]
    model.variables += [Variable(y, "binary") for y in Y]
    model.variables += [Variable(z_name(p, q), "binary") for p in range(m) for q in range(m) if p != q]

    model.objective = [(X[k], inst.base_costs[k]) for k in range(m)]
    model.objective += [(Y[r], delta_cost(inst, r)) for r in range(len(inst.relations))]

    def u_of(arc):
        return U[inst.arcs[arc].tail]

    rows_out: list[Constraint] = []
    for i in range(n):
        out_arcs = [k for k, a in enumerate(inst.arcs) if a.tail == i]
        rows_out.append(_row(f"flow_out_{i}", "4a", [(X[k], 1.0) for k in out_arcs], "=", 1))
    for i in range(n):
        in_arcs = [k for k, a in enumerate(inst.arcs) if a.head == i]
        rows_out.append(_row(f"flow_in_{i}", "4b", [(X[k], 1.0) for k in in_arcs], "=", 1))
    for k, a in enumerate(inst.arcs):
        if a.head != 0:
            rows_out.append(_row(f"mtz_{a.tail}_{a.head}", "4c",
                                 [(U[a.tail], 1.0), (U[a.head], -1.0), (X[k], float(n))], "<=", n - 1))
    rows_out.append(_row("start_0", "4d", [(U[0], 1.0)], "=", 0))

    for a, rels in enumerate(inst.relations_by_target):
        if rels:
            rows_out.append(_row(f"rel_active_a{a}", "4e",
                                 [(Y[r], 1.0) for r in rels] + [(X[a], -1.0)], "<=", 0))
    for r, rel in enumerate(inst.relations):
        rows_out.append(_row(f"rel_trigger_r{r}", "4f", [(Y[r], 1.0), (X[rel.trigger], -1.0)], "<=", 0))
    for r, rel in enumerate(inst.relations):
        # u_b + 1 <= u_a + N (1 - y)
        rows_out.append(_row(f"rel_prec_r{r}", "4g",
                             [(u_of(rel.trigger), 1.0), (u_of(rel.target), -1.0), (Y[r], float(n))],
                             "<=", n - 1))
    for r, rel in enumerate(inst.relations):
        a, b = rel.target, rel.trigger
        # 1 - z_ab <= sum_c y_ca + (1 - x_a) + (1 - x_b)
        terms = [(z_name(a, b), -1.0)] + [(Y[c], -1.0) for c in inst.relations_by_target[a]]
        terms += [(X[a], 1.0), (X[b], 1.0)]
        rows_out.append(_row(f"rel_force_r{r}", "4h", terms, "<=", 1))
    for p in range(m):
        for q in range(m):
            if p != q:
                # u_p <= u_q + (N - 1)(1 - z_pq)
                rows_out.append(_row(f"z_prec_a{p}_a{q}", "4i",
                                     [(u_of(p), 1.0), (u_of(q), -1.0), (z_name(p, q), float(n - 1))],
                                     "<=", n - 1))
    for a, rels in enumerate(inst.relations_by_target):
        for rb in rels:
            for rc in rels:
                if rb == rc:
                    continue
                b, c = inst.relations[rb].trigger, inst.relations[rc].trigger
                # y_ba <= y_ca + z_cb + z_ac + (1-x_c) + (1-x_b) + (1-x_a)
                terms = [(Y[rb], 1.0), (Y[rc], -1.0), (z_name(c, b), -1.0), (z_name(a, c), -1.0),
                         (X[c], 1.0), (X[b], 1.0), (X[a], 1.0)]
                rows_out.append(_row(f"last_trigger_r{rb}_r{rc}", "4j", terms, "<=", 3))
    model.constraints = rows_out
    return model


# -- LP format -------------------------------------------------------------

def _num(v: float) -> str:
    v = float(v)
    return str(int(v)) if v.is_integer() else repr(v)


def _expr(terms: Sequence[tuple[str, float]], per_line: int = 8) -> list[str]:
    if not terms:
        return ["0 u_0"]
    chunks, line = [], []
    for k, (var, coef) in enumerate(terms):
        sign = "-" if coef < 0 else "+"
        piece = f"{sign} {_num(abs(coef))} {var}"
        if k == 0 and sign == "+":
            piece = f"{_num(coef)} {var}"
        line.append(piece)
        if len(line) == per_line:
            chunks.append(" ".join(line))
            line = []
    if line:
        chunks.append(" ".join(line))
    return chunks


def write_lp(model: Model, sink: TextIO | None = None) -> str:
    """Serialize to CPLEX LP text; returns the text and also writes it to ``sink`` if given."""
    buf = io.StringIO()
    w = buf.write
    w(f"\\ TA-TSP model {model.name}\n")
    w("Minimize\n")
    obj = [(v, c) for v, c in model.objective if c != 0]
    lines = _expr(obj)
    w(f" obj: {lines[0]}\n")
    for extra in lines[1:]:
        w(f"   {extra}\n")
    w("Subject To\n")
    for c in model.constraints:
        lines = _expr(c.terms)
        w(f" {c.name}: {lines[0]}\n")
        for extra in lines[1:]:
            w(f"   {extra}\n")
        w(f"   {c.sense} {_num(c.rhs)}\n")
    w("Bounds\n")
    for v in model.variables:
        if v.kind == "integer":
            w(f" {_num(v.lower)} <= {v.name} <= {_num(v.upper)}\n")
    w("Generals\n")
    for v in model.variables:
        if v.kind == "integer":
            w(f" {v.name}\n")
    w("Binaries\n")
    for v in model.variables:
        if v.kind == "binary":
            w(f" {v.name}\n")
    w("End\n")
    text = buf.getvalue()
    if sink is not None:
        sink.write(text)
    return text


# -- assignments -----------------------------------------------------------

@dataclass
class CheckReport:
    feasible: bool
    violated: list[tuple[str, str]]  # (row name, family)
    objective: float

    @property
    def violated_families(self) -> set[str]:
        return {fam for _, fam in self.violated}


def tour_assignment(inst: Instance, tour: Sequence[int]) -> dict[str, float]:
    """Variable values encoding ``tour``.

    ``z_pq`` is 1 exactly when the tail of arc p is visited no later than the
    tail of arc q, for tour and non-tour arcs alike.
    """
    ev = evaluate_tour(inst, tour)
    n, m = inst.node_count, inst.arc_count
    pos = [0] * n
    for p, node in enumerate(tour):
        pos[node] = p
    values: dict[str, float] = {x_name(inst, k): 0.0 for k in range(m)}
    for k in ev.arcs:
        values[x_name(inst, k)] = 1.0
    for i in range(n):
        values[u_name(i)] = float(pos[i])
    for r in range(len(inst.relations)):
        values[y_name(r)] = 0.0
    for r in ev.active_relations:
        if r is not None:
            values[y_name(r)] = 1.0
    tail_pos = [pos[a.tail] for a in inst.arcs]
    for p in range(m):
        for q in range(m):
            if p != q:
                values[z_name(p, q)] = 1.0 if tail_pos[p] <= tail_pos[q] else 0.0
    return values


class MissingValueError(TatspError):
    pass


def check_assignment(model: Model, values: Mapping[str, float], tol: float = FEASIBILITY_TOL) -> CheckReport:
    missing = [v.name for v in model.variables if v.name not in values]
    if missing:
        raise MissingValueError(f"assignment lacks {len(missing)} variables, e.g. {missing[:3]}")
    violated = []
    for v in model.variables:
        val = values[v.name]
        integral = abs(val - round(val)) <= tol
        if not integral or val < v.lower - tol or val > v.upper + tol:
            violated.append((f"bound_{v.name}", "bounds"))
    for c in model.constraints:
        if not c.satisfied(values, tol):
            violated.append((c.name, c.family))
    objective = sum(coef * values[var] for var, coef in model.objective)
    return CheckReport(not violated, violated, objective)
