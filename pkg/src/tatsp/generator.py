"""Synthetic RG-style instances: Euclidean complete digraphs with random relations."""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .model import Instance, save_instance

SIDE_METERS = 5000.0
NODE_COUNTS = (10, 15, 20, 25)
REPLICAS = 3


class Scenario(enum.Enum):
    BALANCED = "balanced"
    INCREASE = "increase"
    DECREASE = "decrease"

    @property
    def cost_range(self) -> tuple[float, float]:
        """Relation cost bounds as multiples of the target arc's base cost."""
        return _RANGES[self]


_RANGES = {
    Scenario.BALANCED: (0.5, 2.0),
    Scenario.INCREASE: (1.0, 2.0),
    Scenario.DECREASE: (0.5, 1.0),
}


def relation_counts(n: int) -> tuple[int, ...]:
    return (n // 2, 2 * n, 4 * n, 8 * n, 16 * n)


@dataclass(frozen=True)
class RgSpec:
    scenario: Scenario
    n: int
    relation_count: int
    seed: int
    replica: int = 0

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("need at least 2 nodes")
        m = self.n * (self.n - 1)
        if not 0 <= self.relation_count <= m * (m - 1):
            raise ValueError(
                f"{self.relation_count} relations exceed the {m * (m - 1)} distinct arc pairs of n={self.n}")

    @property
    def name(self) -> str:
        return f"rg_{self.scenario.value}_{self.n}_{self.relation_count}_{self.replica}"


def derive_seed(base_seed: int, ordinal: int) -> int:
    """64-bit seed for the ``ordinal``-th instance of a suite."""
    state = np.random.SeedSequence([base_seed, ordinal]).generate_state(1, dtype=np.uint64)
    return int(state[0])


def generate_rg(spec: RgSpec) -> Instance:
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    n = spec.n
    points = rng.uniform(0.0, SIDE_METERS, size=(n, 2))
    arcs = []
    for i in range(n):
        for j in range(n):
            if i != j:
                arcs.append((i, j, math.dist(points[i], points[j])))

    m = len(arcs)
    # index k over ordered pairs of distinct arcs: trigger k // (m-1), target skips the trigger
    picks = np.sort(rng.choice(m * (m - 1), size=spec.relation_count, replace=False))
    lo, hi = spec.scenario.cost_range
    factors = rng.uniform(lo, hi, size=spec.relation_count)
    relations = []
    for k, f in zip(picks.tolist(), factors.tolist()):
        trigger, t = divmod(k, m - 1)
        target = t if t < trigger else t + 1
        relations.append((trigger, target, f * arcs[target][2]))
    return Instance.build(n, arcs, relations, name=spec.name)


def rg_suite(base_seed: int = 0) -> list[RgSpec]:
    """The 180-instance layout: scenario x node count x relation count x replica."""
    specs = []
    for scenario in Scenario:
        for n in NODE_COUNTS:
            for rels in relation_counts(n):
                for replica in range(REPLICAS):
                    seed = derive_seed(base_seed, len(specs))
                    specs.append(RgSpec(scenario, n, rels, seed, replica))
    return specs


MANIFEST_FIELDS = ("scenario", "n", "relations", "replica", "seed", "filename")


def write_suite(specs: list[RgSpec], out_dir: str | Path) -> Path:
    """Write every instance plus ``manifest.csv`` into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = out / "manifest.csv"
    with manifest.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(MANIFEST_FIELDS)
        for spec in specs:
            filename = f"{spec.name}.tatsp"
            save_instance(generate_rg(spec), out / filename)
            writer.writerow([spec.scenario.value, spec.n, spec.relation_count, spec.replica, spec.seed, filename])
    return manifest


def read_manifest(path: str | Path) -> list[dict]:
    path = Path(path)
    with path.open(newline="") as fh:
        rows = list(csv.DictReader(fh))
    for row in rows:
        row["path"] = path.parent / row["filename"]
    return rows
