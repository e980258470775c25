"""Ground truth by exhaustive enumeration, plus exact and statistical comparisons.

Tree catalogues are produced by backtracking over depth-first child-count
sequences while drawing degrees from the remaining multiset.  This never
uses the cycle lemma, so agreement with :mod:`planetrees.sampler` is a real
cross-check.
"""

from __future__ import annotations

import heapq
import itertools
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Hashable, Iterable, Iterator, Sequence

from scipy import stats as sps

from .degseq import DegreeSequence, count_forests, require_tree
from .sampler import MarkedTree
from .tree_core import PlaneTree

DEFAULT_CAP = 12


class CapExceededError(ValueError):
    pass


@dataclass(frozen=True)
class TreeCatalogue:
    degseq: DegreeSequence
    trees: tuple[PlaneTree, ...]

    def __len__(self) -> int:
        return len(self.trees)

    def index(self) -> dict[tuple, int]:
        return {t.key(): i for i, t in enumerate(self.trees)}


def _check_cap(s: DegreeSequence, cap: int) -> None:
    if s.size > cap:
        raise CapExceededError(f"|s| = {s.size} exceeds the enumeration cap {cap}")


def iter_excursions(counts: Sequence[int]) -> Iterator[tuple[int, ...]]:
    """All depth-first child-count sequences using exactly ``counts[i]`` nodes of degree i.

    Sequences come out in increasing lexicographic order.
    """
    remaining = list(counts)
    n = sum(remaining)
    seq: list[int] = []

    def rec(height: int):
        # height = partial sum of (c - 1) so far; must stay >= 0 until the end
        k = len(seq)
        if k == n:
            if height == -1:
                yield tuple(seq)
            return
        for d, left in enumerate(remaining):
            if not left:
                continue
            h = height + d - 1
            if h < 0 and k + 1 < n:
                continue
            remaining[d] -= 1
            seq.append(d)
            yield from rec(h)
            seq.pop()
            remaining[d] += 1

    yield from rec(0)


def enumerate_trees(s: DegreeSequence, cap: int = DEFAULT_CAP) -> TreeCatalogue:
    require_tree(s)
    _check_cap(s, cap)
    trees = tuple(PlaneTree(c, _trusted=True) for c in iter_excursions(s.counts))
    return TreeCatalogue(s, trees)


def enumerate_marked(s: DegreeSequence, cap: int = DEFAULT_CAP) -> list[MarkedTree]:
    cat = enumerate_trees(s, cap)
    return [MarkedTree(t, u) for t in cat.trees for u in range(1, len(t) + 1)]


def _partitions(total: int, largest: int) -> Iterator[list[int]]:
    if total == 0:
        yield []
        return
    for part in range(min(total, largest), 0, -1):
        for rest in _partitions(total - part, part):
            yield [part] + rest


def tree_sequences(size: int) -> Iterator[DegreeSequence]:
    """Every tree degree sequence with exactly ``size`` nodes.

    The internal degrees of a tree sum to ``size - 1``, and any partition of
    ``size - 1`` works (the rest of the nodes are leaves).
    """
    for internal in _partitions(size - 1, size - 1):
        counts = [0] * (max(internal, default=0) + 1)
        counts[0] = size - len(internal)
        for d in internal:
            counts[d] += 1
        yield DegreeSequence(tuple(counts))


def all_tree_sequences(max_size: int) -> list[DegreeSequence]:
    return [s for n in range(1, max_size + 1) for s in tree_sequences(n)]


# -- statistics ----------------------------------------------------------------

@dataclass
class ChiSquareReport:
    statistic: float
    dof: int
    p_value: float
    alpha: float
    passed: bool
    total: int
    warnings: list[str] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "statistic": self.statistic,
            "dof": self.dof,
            "p_value": self.p_value,
            "alpha": self.alpha,
            "passed": self.passed,
            "total": self.total,
            "warnings": self.warnings,
        }


def chi_square_uniformity(observed: Sequence[int], alpha: float = 1e-3) -> ChiSquareReport:
    """Pearson chi-square test of ``observed`` cell counts against the uniform law."""
    obs = [int(x) for x in observed]
    total = sum(obs)
    if not obs or total == 0:
        raise ValueError("chi-square test needs at least one observation")
    k = len(obs)
    notes = []
    expected = total / k
    if expected < 5:
        notes.append(f"expected count per cell {expected:.2f} < 5; chi-square approximation is unreliable")
    if k == 1:
        return ChiSquareReport(0.0, 0, 1.0, alpha, True, total, notes)
    stat = sum((o - expected) ** 2 for o in obs) / expected
    p = float(sps.chi2.sf(stat, k - 1))
    return ChiSquareReport(float(stat), k - 1, p, alpha, p >= alpha, total, notes)


def tally(items: Iterable[Hashable], cells: Sequence[Hashable]) -> list[int]:
    """Counts of ``items`` per cell, in the order of ``cells``; unknown items are an error."""
    counts = Counter(items)
    unknown = set(counts) - set(cells)
    if unknown:
        raise ValueError(f"{len(unknown)} observed values fall outside the catalogue")
    return [counts.get(c, 0) for c in cells]


def exact_law(items: Iterable, statistic: Callable) -> dict:
    """Exact pmf of ``statistic`` under the uniform law on ``items``."""
    counts = Counter(statistic(x) for x in items)
    total = sum(counts.values())
    return {k: Fraction(v, total) for k, v in sorted(counts.items(), key=lambda kv: repr(kv[0]))}


def exact_law_comparison(catalogue: TreeCatalogue, statistic: Callable[[PlaneTree], Hashable]) -> dict:
    return exact_law(catalogue.trees, statistic)


# -- labelled trees ------------------------------------------------------------

def prufer_decode(seq: Sequence[int], n: int) -> list[tuple[int, int]]:
    """Edges of the labelled tree on ``0..n-1`` with Prufer code ``seq``."""
    degree = [1] * n
    for x in seq:
        degree[x] += 1
    leaves = [i for i in range(n) if degree[i] == 1]
    heapq.heapify(leaves)
    edges = []
    for x in seq:
        leaf = heapq.heappop(leaves)
        edges.append((leaf, x))
        degree[x] -= 1
        if degree[x] == 1:
            heapq.heappush(leaves, x)
    u, v = heapq.heappop(leaves), heapq.heappop(leaves)
    edges.append((u, v))
    return edges


def enumerate_rooted_labelled(n: int) -> Iterator[tuple[int, ...]]:
    """Every rooted labelled tree on ``0..n-1`` as a parent tuple (root's parent is -1)."""
    if n == 1:
        yield (-1,)
        return
    for code in itertools.product(range(n), repeat=n - 2):
        adj: list[list[int]] = [[] for _ in range(n)]
        for a, b in prufer_decode(code, n):
            adj[a].append(b)
            adj[b].append(a)
        for root in range(n):
            par = [-2] * n
            par[root] = -1
            stack = [root]
            while stack:
                v = stack.pop()
                for w in adj[v]:
                    if par[w] == -2:
                        par[w] = v
                        stack.append(w)
            yield tuple(par)


def labelled_child_counts(parents: Sequence[int]) -> tuple[int, ...]:
    counts = [0] * len(parents)
    for p in parents:
        if p >= 0:
            counts[p] += 1
    return tuple(counts)


def labelled_counts_by_degseq(n: int) -> Counter:
    """Number of rooted labelled trees on ``n`` labels for each degree sequence."""
    out: Counter = Counter()
    for par in enumerate_rooted_labelled(n):
        hist = Counter(labelled_child_counts(par))
        counts = [0] * (max(hist) + 1)
        for d, c in hist.items():
            counts[d] = c
        out[DegreeSequence(tuple(counts))] += 1
    return out


def verify_counts(max_size: int, cap: int = DEFAULT_CAP) -> list[tuple[DegreeSequence, int, int]]:
    """(s, catalogue size, formula) for every tree sequence up to ``max_size``."""
    rows = []
    for s in all_tree_sequences(max_size):
        rows.append((s, sum(1 for _ in iter_excursions(s.counts)) if s.size <= cap else -1, count_forests(s)))
    return rows
