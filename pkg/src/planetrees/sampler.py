"""Exact samplers for plane trees with a prescribed degree sequence.

Randomness comes from numpy's ``Generator`` over the PCG64 bit generator.
A seed is a non-negative integer; replica ``k`` of a batch run uses the
``k``-th child of ``SeedSequence(seed)`` (see :func:`replica_seeds`), so
results do not depend on how replicas are scheduled.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .degseq import DegreeSequence, DegreeSequenceError, require_tree
from .tree_core import PlaneTree, single_node

RNG_NAME = "numpy.random.PCG64"


class FeasibilityError(ValueError):
    """The conditioned sampler could not produce a tree of the requested size."""


def make_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, np.random.SeedSequence):
        return np.random.Generator(np.random.PCG64(seed))
    if seed is None or int(seed) < 0:
        raise ValueError("an explicit non-negative integer seed is required")
    return np.random.Generator(np.random.PCG64(int(seed)))


def replica_seeds(seed: int, count: int) -> list[np.random.SeedSequence]:
    return np.random.SeedSequence(int(seed)).spawn(count)


# -- cycle lemma -------------------------------------------------------------

def _rotate_to_excursion(increments: np.ndarray) -> np.ndarray:
    """Cyclic shift of a walk ending at -1 that turns it into an excursion.

    The shift starts right after the first time the walk attains its minimum
    over times ``1..n``.
    """
    walk = np.cumsum(increments)
    j = int(np.argmin(walk)) + 1  # argmin returns the first minimum
    if j == len(increments):
        return increments
    return np.concatenate((increments[j:], increments[:j]))


def _shuffled_increments(s: DegreeSequence, rng: np.random.Generator) -> np.ndarray:
    counts = np.repeat(np.arange(len(s.counts), dtype=np.int64), s.counts)
    rng.shuffle(counts)
    return counts - 1


def sample_uniform(s: DegreeSequence, seed) -> PlaneTree:
    """Uniform plane tree among all trees with degree sequence ``s``."""
    require_tree(s)
    if s.size == 1:
        return single_node()
    rng = make_rng(seed)
    inc = _rotate_to_excursion(_shuffled_increments(s, rng))
    return PlaneTree(inc + 1, _trusted=True)


def sample_uniform_forest(s: DegreeSequence, seed) -> list[PlaneTree]:
    """Uniform ordered forest of ``r`` plane trees with degree sequence ``s``.

    Each rotation class of the shuffled walk holds exactly ``r`` forest walks;
    after moving to the first minimum we pick one of them uniformly.
    """
    r = s.roots
    if r < 1:
        raise DegreeSequenceError(f"{s} has no roots")
    rng = make_rng(seed)
    inc = _shuffled_increments(s, rng)
    walk = np.cumsum(inc)
    j = int(np.argmin(walk)) + 1
    inc = np.concatenate((inc[j:], inc[:j]))
    k = int(rng.integers(r))
    if k:
        walk = np.cumsum(inc)
        cut = int(np.argmax(walk == -k)) + 1  # first hitting time of -k
        inc = np.concatenate((inc[cut:], inc[:cut]))
    return split_forest(inc + 1)


def split_forest(child_counts: Sequence[int]) -> list[PlaneTree]:
    """Cut a forest's concatenated depth-first child counts into its trees."""
    counts = np.asarray(child_counts, dtype=np.int64)
    walk = np.cumsum(counts - 1)
    # Tree k ends where the walk first reaches -k.
    ends = np.flatnonzero(walk < np.minimum.accumulate(np.concatenate(([0], walk[:-1]))))
    out, start = [], 0
    for e in ends:
        out.append(PlaneTree(counts[start : e + 1]))
        start = e + 1
    return out


# -- marked trees --------------------------------------------------------------

@dataclass(frozen=True)
class MarkedTree:
    tree: PlaneTree
    mark: int

    def __post_init__(self):
        if not 1 <= self.mark <= len(self.tree):
            raise IndexError(f"mark {self.mark} outside [1, {len(self.tree)}]")

    def key(self) -> tuple:
        return (self.tree.key(), self.mark)


def sample_marked(s: DegreeSequence, seed) -> MarkedTree:
    """Uniform tree of ``T_s`` with an independent uniform node."""
    rng = make_rng(seed)
    t = sample_uniform(s, rng)
    return MarkedTree(t, int(rng.integers(1, len(t) + 1)))


# -- unary nodes -----------------------------------------------------------

def erase_unary(t: PlaneTree) -> PlaneTree:
    """Contract every node with exactly one child."""
    counts = t.child_counts
    return PlaneTree(counts[counts != 1], _trusted=True)


def insert_unary(t_star: PlaneTree, n1: int, seed) -> PlaneTree:
    """Add ``n1`` unary nodes to a unary-free tree, uniformly over the results.

    There is one slot above each node of ``t_star`` (the slot above the root
    is a phantom edge).  Trees erasing to ``t_star`` correspond one-to-one to
    weak compositions of ``n1`` into ``|t_star|`` slot counts, so the counts
    are drawn uniformly by stars and bars.
    """
    counts = t_star.child_counts
    if (counts == 1).any():
        raise ValueError("insert_unary needs a tree without unary nodes")
    if n1 < 0:
        raise ValueError("n1 must be non-negative")
    if n1 == 0:
        return t_star
    rng = make_rng(seed)
    slots = len(counts)
    bars = np.sort(rng.choice(n1 + slots - 1, size=slots - 1, replace=False))
    edges = np.concatenate(([-1], bars, [n1 + slots - 1]))
    per_slot = np.diff(edges) - 1
    # Inserted unary nodes sit just before their lower endpoint in depth-first order.
    out = np.empty(n1 + slots, dtype=np.int64)
    pos = np.arange(slots) + np.cumsum(per_slot)
    out.fill(1)
    out[pos] = counts
    return PlaneTree(out, _trusted=True)


# -- conditioned Galton-Watson -----------------------------------------------

@dataclass(frozen=True)
class OffspringDistribution:
    """Offspring law ``mu``: finite probability vector or a named family.

    ``family="geometric"`` is ``mu_k = (1 - q) q^k`` with ``q = 1/2`` by
    default (mean 1, variance 2).
    """

    probabilities: tuple = ()
    family: str | None = None
    param: float = 0.5

    def __post_init__(self):
        if self.family is None:
            probs = [float(p) for p in self.probabilities]
            if not probs or min(probs) < 0:
                raise ValueError("offspring probabilities must be non-negative and non-empty")
            if abs(sum(probs) - 1) > 1e-9:
                raise ValueError(f"offspring probabilities sum to {sum(probs)}, not 1")
        elif self.family != "geometric":
            raise ValueError(f"unknown offspring family {self.family!r}")
        elif not 0 < self.param < 1:
            raise ValueError("geometric parameter must lie in (0, 1)")

    @classmethod
    def geometric(cls, q: float = 0.5) -> OffspringDistribution:
        return cls(family="geometric", param=q)

    def pmf(self, i: int) -> float:
        if self.family == "geometric":
            return (1 - self.param) * self.param**i
        return float(self.probabilities[i]) if i < len(self.probabilities) else 0.0

    @property
    def mean(self) -> float:
        if self.family == "geometric":
            return self.param / (1 - self.param)
        return sum(i * float(p) for i, p in enumerate(self.probabilities))

    @property
    def variance(self) -> float:
        if self.family == "geometric":
            return self.param / (1 - self.param) ** 2
        second = sum(i * i * float(p) for i, p in enumerate(self.probabilities))
        return second - self.mean**2

    def check_critical(self, tol: float = 1e-9) -> None:
        if abs(self.mean - 1) > tol:
            raise ValueError(f"offspring mean is {self.mean}, conditioned experiments need mean 1")

    def draw(self, rng: np.random.Generator, shape) -> np.ndarray:
        if self.family == "geometric":
            return rng.geometric(1 - self.param, size=shape).astype(np.int64) - 1
        probs = np.array([float(p) for p in self.probabilities])
        return rng.choice(len(probs), size=shape, p=probs / probs.sum()).astype(np.int64)

    def to_json(self) -> dict:
        if self.family:
            return {"family": self.family, "param": self.param}
        return {"probabilities": [str(Fraction(p)) if isinstance(p, Fraction) else p
                                  for p in self.probabilities]}

    @classmethod
    def from_json(cls, data: dict) -> OffspringDistribution:
        if "family" in data:
            return cls(family=data["family"], param=float(data.get("param", 0.5)))
        return cls(probabilities=tuple(float(Fraction(str(p))) for p in data["probabilities"]))


def sample_gw_conditioned(mu: OffspringDistribution, n: int, seed, max_attempts: int = 100_000) -> PlaneTree:
    """Galton-Watson tree with offspring law ``mu`` conditioned to have ``n`` nodes.

    Draws ``n`` i.i.d. offspring counts until their walk is a bridge from 0 to
    -1, then rotates the bridge into an excursion.
    """
    if n < 1:
        raise ValueError("tree size must be >= 1")
    rng = make_rng(seed)
    target = n - 1
    # Batch attempts per draw, doubling the batch while nothing is accepted;
    # acceptance is only tested on row sums.
    cap = max(1, min(1_000_000 // n, 4096))
    batch = min(16, cap)
    tried = 0
    while tried < max_attempts:
        rows = min(batch, max_attempts - tried)
        draws = mu.draw(rng, (rows, n))
        hit = np.flatnonzero(draws.sum(axis=1) == target)
        if hit.size:
            counts = draws[hit[0]]
            return PlaneTree(_rotate_to_excursion(counts - 1) + 1, _trusted=True)
        tried += rows
        batch = min(2 * batch, cap)
    raise FeasibilityError(
        f"no tree of size {n} after {max_attempts} attempts; "
        f"P(|t| = {n}) may be zero for this offspring law (check periodicity)"
    )
