import numpy as np
import pytest

from tatsp.generator import RgSpec, Scenario, generate_rg
from tatsp.model import Instance


def complete_arcs(n, cost=lambda i, j: 1.0):
    return [(i, j, cost(i, j)) for i in range(n) for j in range(n) if i != j]


def make_fix_a():
    return Instance.build(3, complete_arcs(3), name="FIX-A")


def _fix_b_arcs():
    return complete_arcs(4, lambda i, j: 5.0 if (i, j) == (2, 3) else 1.0)


def make_fix_b():
    arcs = _fix_b_arcs()
    idx = {(t, h): k for k, (t, h, _) in enumerate(arcs)}
    return Instance.build(4, arcs, [(idx[0, 1], idx[2, 3], 1.0)], name="FIX-B")


def make_fix_c():
    arcs = _fix_b_arcs()
    idx = {(t, h): k for k, (t, h, _) in enumerate(arcs)}
    rels = [(idx[0, 1], idx[2, 3], 1.0), (idx[1, 2], idx[2, 3], 4.0)]
    return Instance.build(4, arcs, rels, name="FIX-C")


@pytest.fixture
def fix_a():
    return make_fix_a()


@pytest.fixture
def fix_b():
    return make_fix_b()


@pytest.fixture
def fix_c():
    return make_fix_c()


def random_instance(rng, n, relation_count=None, density=1.0, scenario=None, integer=False):
    """Random instance, optionally sparse; arcs kept with probability ``density``.

    A random Hamiltonian cycle is always kept so sparse instances stay feasible.
    """
    order = [0] + list(rng.permutation(np.arange(1, n)))
    keep = {(order[p], order[(p + 1) % n]) for p in range(n)}
    arcs = []
    for i in range(n):
        for j in range(n):
            if i != j and ((i, j) in keep or rng.random() < density):
                c = float(rng.integers(1, 50)) if integer else float(rng.uniform(1, 100))
                arcs.append((i, j, c))
    m = len(arcs)
    if relation_count is None:
        relation_count = int(rng.integers(0, 3 * n))
    relation_count = min(relation_count, m * (m - 1))
    pairs = set()
    while len(pairs) < relation_count:
        a, b = (int(v) for v in rng.integers(m, size=2))
        if a != b:
            pairs.add((a, b))
    scen = scenario or list(Scenario)[int(rng.integers(3))]
    lo, hi = scen.cost_range
    rels = []
    for a, b in sorted(pairs):
        base = arcs[b][2]
        c = float(rng.integers(0, 60)) if integer else float(rng.uniform(lo, hi) * base)
        rels.append((a, b, c))
    return Instance.build(n, arcs, rels)


def random_tour(rng, inst):
    """Uniform random feasible tour by rejection; None after many failures."""
    n = inst.node_count
    for _ in range(2000):
        tour = (0, *(int(v) for v in rng.permutation(np.arange(1, n))))
        if all((tour[p], tour[(p + 1) % n]) in inst.arc_index for p in range(n)):
            return tour
    return None


def rg_instance(n, factor, seed, scenario=Scenario.BALANCED):
    return generate_rg(RgSpec(scenario, n, factor, seed))
