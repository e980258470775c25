"""Coalescing particles with constrained valences.

Particle ``i`` owns ``c_i`` free slots (``sum c_i = n - 1``).  At each step a
free slot is picked uniformly; the root of another uniformly chosen cluster
is attached to it, and the merged cluster keeps the slot owner's root.  After
``n - 1`` steps a single tree remains.

In the labelled variant particles receive degrees through a uniform
permutation and children are unordered.  In the plane variant particle ``i``
gets the ``i``-th smallest degree and its slots are ordered, so the result
is a plane tree.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial
from typing import Sequence

import numpy as np

from .degseq import DegreeSequence, multinomial, require_tree
from .sampler import make_rng
from .tree_core import PlaneTree


class UnionFind:
    """Disjoint sets over ``0..n-1`` with path compression and union by size."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: int, b: int) -> int:
        a, b = self.find(a), self.find(b)
        if a == b:
            return a
        if self.size[a] < self.size[b]:
            a, b = b, a
        self.parent[b] = a
        self.size[a] += self.size[b]
        return a


@dataclass
class ParticleSystem:
    """State of one coalescent run.

    ``free`` holds ``(particle, slot)`` pairs; ``clusters`` holds the tree
    root of every live cluster.  Both support O(1) uniform picks and
    swap-removal.
    """

    degrees: list[int]
    free: list[tuple[int, int]] = field(init=False)
    clusters: list[int] = field(init=False)
    where: dict[int, int] = field(init=False)  # tree root -> index in clusters
    tree_root: dict[int, int] = field(init=False)  # union-find rep -> tree root
    uf: UnionFind = field(init=False)
    attached: list[list[int | None]] = field(init=False)  # slot contents per particle
    history: list[tuple[int, int, int]] = field(init=False)  # (particle, slot, attached root)

    def __post_init__(self):
        n = len(self.degrees)
        if n < 1:
            raise ValueError("need at least one particle")
        if any(c < 0 for c in self.degrees):
            raise ValueError("degrees must be non-negative")
        if sum(self.degrees) != n - 1:
            raise ValueError(f"degrees sum to {sum(self.degrees)}, need n - 1 = {n - 1}")
        self.free = [(p, k) for p, c in enumerate(self.degrees) for k in range(c)]
        self.clusters = list(range(n))
        self.where = {i: i for i in range(n)}
        self.tree_root = {i: i for i in range(n)}
        self.uf = UnionFind(n)
        self.attached = [[None] * c for c in self.degrees]
        self.history = []

    @property
    def n(self) -> int:
        return len(self.degrees)

    @property
    def steps(self) -> int:
        return len(self.history)

    def _drop_cluster(self, root: int) -> None:
        i = self.where.pop(root)
        last = self.clusters.pop()
        if last != root:
            self.clusters[i] = last
            self.where[last] = i

    def step(self, rng: np.random.Generator) -> None:
        if not self.free:
            raise RuntimeError("no free slots left")
        i = int(rng.integers(len(self.free)))
        p, k = self.free[i]
        self.free[i] = self.free[-1]
        self.free.pop()
        own = self.tree_root[self.uf.find(p)]
        while True:  # another cluster, uniformly: reject our own
            other = self.clusters[int(rng.integers(len(self.clusters)))]
            if other != own:
                break
        self.attached[p][k] = other
        self.history.append((p, k, other))
        self._drop_cluster(other)
        rep = self.uf.union(p, other)
        self.tree_root[rep] = own

    def run(self, rng: np.random.Generator) -> ParticleSystem:
        while self.free:
            self.step(rng)
        return self

    @property
    def root(self) -> int:
        if len(self.clusters) != 1:
            raise RuntimeError("process has not finished")
        return self.clusters[0]


@dataclass(frozen=True)
class LabelledTree:
    """Rooted tree on labels ``1..n``; ``parent[label]`` is 0 for the root."""

    parent: tuple[int, ...]  # index 0 unused

    @property
    def n(self) -> int:
        return len(self.parent) - 1

    @property
    def root(self) -> int:
        return self.parent.index(0, 1)

    def children(self) -> dict[int, list[int]]:
        out: dict[int, list[int]] = {v: [] for v in range(1, self.n + 1)}
        for v in range(1, self.n + 1):
            if self.parent[v]:
                out[self.parent[v]].append(v)
        return out

    def degree_sequence(self) -> DegreeSequence:
        hist = Counter(len(k) for k in self.children().values())
        return DegreeSequence(tuple(hist.get(i, 0) for i in range(max(hist) + 1)))

    def to_plane_tree(self) -> PlaneTree:
        """Forget labels, ordering each node's children by label."""
        kids = self.children()
        out, stack = [], [self.root]
        while stack:
            v = stack.pop()
            out.append(len(kids[v]))
            stack.extend(reversed(kids[v]))
        return PlaneTree(out, _trusted=True)

    def to_json(self) -> dict:
        return {"parent": list(self.parent[1:])}


@dataclass
class CoalescentRun:
    mode: str
    system: ParticleSystem
    labels: list[int]  # label (1-based) of each particle
    tree: LabelledTree | PlaneTree


def _labelled_tree(system: ParticleSystem, labels: Sequence[int]) -> LabelledTree:
    parent = [0] * (system.n + 1)
    for p, _, child in system.history:
        parent[labels[child]] = labels[p]
    return LabelledTree(tuple(parent))


def _plane_tree(system: ParticleSystem) -> PlaneTree:
    out, stack = [], [system.root]
    while stack:
        v = stack.pop()
        out.append(system.degrees[v])
        stack.extend(reversed(system.attached[v]))
    return PlaneTree(out, _trusted=True)


def run_labelled(degrees: Sequence[int], seed) -> CoalescentRun:
    rng = make_rng(seed)
    degrees = sorted(int(c) for c in degrees)
    sigma = rng.permutation(len(degrees))
    # Particle i gets degree c_{sigma(i)}; particles carry labels 1..n.
    system = ParticleSystem([degrees[j] for j in sigma]).run(rng)
    labels = list(range(1, len(degrees) + 1))
    return CoalescentRun("labelled", system, labels, _labelled_tree(system, labels))


def run_plane(s: DegreeSequence, seed) -> CoalescentRun:
    require_tree(s)
    rng = make_rng(seed)
    system = ParticleSystem(s.child_counts()).run(rng)
    labels = list(range(1, s.size + 1))
    return CoalescentRun("plane", system, labels, _plane_tree(system))


def coalesce_labelled(degrees: Sequence[int], seed) -> LabelledTree:
    return run_labelled(degrees, seed).tree


def coalesce_plane(s: DegreeSequence, seed) -> PlaneTree:
    return run_plane(s, seed).tree


def labelled_tree_probability(s: DegreeSequence) -> Fraction:
    """Probability of each labelled tree with degree sequence ``s`` under the labelled process."""
    require_tree(s)
    num = 1
    for i, k in enumerate(s.counts):
        num *= factorial(i) ** k
    return Fraction(num, factorial(s.size - 1) * multinomial(s.counts))


def plane_tree_probability(s: DegreeSequence) -> Fraction:
    """Probability of each plane tree under the plane process: ``n / multinomial(s)``."""
    require_tree(s)
    return Fraction(s.size, multinomial(s.counts))


def trajectory_stats(run: CoalescentRun) -> list[dict[int, int]]:
    """Cluster-size histogram after each step (index 0 is the initial state)."""
    system = run.system
    uf = UnionFind(system.n)
    hist = Counter({1: system.n})
    out = [dict(hist)]
    for p, _, child in system.history:
        a, b = uf.find(p), uf.find(child)
        sa, sb = uf.size[a], uf.size[b]
        for size in (sa, sb):
            hist[size] -= 1
            if not hist[size]:
                del hist[size]
        uf.union(a, b)
        hist[sa + sb] += 1
        out.append(dict(sorted(hist.items())))
    return out

