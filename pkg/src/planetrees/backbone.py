"""Decomposition of a marked plane tree along the branch from the root to the mark.

For a marked tree ``(t, u)`` with ``u`` at depth ``h`` and strict ancestors
``u_0 (root), ..., u_{h-1}``:

* the *composition* ``m`` counts ancestors by number of children;
* the *content* lists ``(c(u_j), i_{j+1})``: each ancestor's child count and
  the index of the child through which the branch continues;
* ``LR`` is the set of children of ancestors that are not themselves
  ancestors (it contains ``u``); ``R`` is the part of it strictly to the right
  of the branch.

The content together with the forest of subtrees rooted on ``LR`` (in
depth-first order of roots) determines the marked tree.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial
from typing import Iterator, Sequence

import numpy as np

from .degseq import DegreeSequence, count_branch_contents
from .oracle import ChiSquareReport, chi_square_uniformity
from .sampler import MarkedTree, make_rng, sample_marked
from .tree_core import PlaneTree, ancestors


class DecompositionError(ValueError):
    pass


@dataclass(frozen=True)
class BranchComposition:
    m: tuple[int, ...]

    def __post_init__(self):
        m = list(self.m)
        while len(m) > 1 and m[-1] == 0:
            m.pop()
        if not m:
            m = [0]
        if m[0] != 0:
            raise DecompositionError(f"branch composition needs m_0 = 0, got m_0 = {m[0]}")
        if any(x < 0 for x in m):
            raise DecompositionError("branch composition entries must be non-negative")
        object.__setattr__(self, "m", tuple(m))

    @property
    def length(self) -> int:
        """``|m|``, the depth of the marked node."""
        return sum(self.m)

    @property
    def lr_size(self) -> int:
        return 1 + sum((i - 1) * mi for i, mi in enumerate(self.m))

    def __getitem__(self, i: int) -> int:
        return self.m[i] if 0 <= i < len(self.m) else 0


BranchContent = tuple  # tuple of (child count, child index) pairs, root first


@dataclass(frozen=True)
class Decomposition:
    content: tuple[tuple[int, int], ...]
    forest: tuple[PlaneTree, ...]


def _branch(mt: MarkedTree) -> list[int]:
    """Ranks ``u_0, ..., u_{h-1}, u``."""
    return ancestors(mt.tree, mt.mark) + [mt.mark]


def branch_content(mt: MarkedTree) -> tuple[tuple[int, int], ...]:
    t = mt.tree
    path = _branch(mt)
    return tuple(
        (int(t.child_counts[a - 1]), int(t.child_index[b - 1]))
        for a, b in zip(path, path[1:])
    )


def branch_composition(mt: MarkedTree) -> BranchComposition:
    degs = [int(mt.tree.child_counts[a - 1]) for a in ancestors(mt.tree, mt.mark)]
    m = [0] * (max(degs, default=0) + 1)
    for d in degs:
        m[d] += 1
    return BranchComposition(tuple(m))


def composition_of_content(content: Sequence[tuple[int, int]]) -> BranchComposition:
    hist = Counter(c for c, _ in content)
    m = [0] * (max(hist, default=0) + 1)
    for d, k in hist.items():
        m[d] = k
    return BranchComposition(tuple(m))


def _split_lr(mt: MarkedTree) -> tuple[list[int], list[int]]:
    """LR nodes left of the branch (top-down) and right of it (top-down)."""
    t = mt.tree
    path = _branch(mt)
    left, right = [], []
    for a, b in zip(path, path[1:]):
        kids = t.children(a)
        i = int(t.child_index[b - 1])
        left.append(kids[: i - 1])
        right.append(kids[i:])
    return [v for part in left for v in part], [v for part in right for v in part]


def lr_set(mt: MarkedTree) -> list[int]:
    left, right = _split_lr(mt)
    return sorted(left + right + [mt.mark])


def r_set(mt: MarkedTree) -> list[int]:
    return sorted(_split_lr(mt)[1])


def decompose(mt: MarkedTree) -> Decomposition:
    t = mt.tree
    forest = tuple(t.subtree(v) for v in lr_set(mt))
    return Decomposition(branch_content(mt), forest)


def recompose(d: Decomposition) -> MarkedTree:
    content = [(int(c), int(i)) for c, i in d.content]
    for c, i in content:
        if c < 1 or not 1 <= i <= c:
            raise DecompositionError(f"child index {i} out of range for an ancestor with {c} children")
    need = 1 + sum(c - 1 for c, _ in content)
    if len(d.forest) != need:
        raise DecompositionError(f"forest has {len(d.forest)} trees but the content needs {need}")
    # Depth-first order of LR roots: left siblings top-down, then u, then
    # right siblings bottom-up.
    n_left = sum(i - 1 for _, i in content)
    left = iter(d.forest[:n_left])
    u_tree = d.forest[n_left]
    right_blocks: list[list[PlaneTree]] = []
    rest = list(d.forest[n_left + 1 :])
    for c, i in reversed(content):
        k = c - i
        right_blocks.append(rest[:k])
        rest = rest[k:]
    right_blocks.reverse()

    pieces: list[np.ndarray] = []
    for j, (c, i) in enumerate(content):
        pieces.append(np.array([c], dtype=np.int64))
        pieces.extend(next(left).child_counts for _ in range(i - 1))
    mark = sum(len(p) for p in pieces) + 1
    pieces.append(u_tree.child_counts)
    for block in reversed(right_blocks):
        pieces.extend(tr.child_counts for tr in block)
    return MarkedTree(PlaneTree(np.concatenate(pieces)), mark)


# -- exact laws ------------------------------------------------------------

def prob_composition(s: DegreeSequence, m: BranchComposition | Sequence[int]) -> Fraction:
    """``P(M(u,t) = m)`` for a uniform marked tree with degree sequence ``s``.

    Returns 0 when some ``m_i > n_i``.
    """
    if not isinstance(m, BranchComposition):
        m = BranchComposition(tuple(m))
    if any(m[i] > s[i] for i in range(len(m.m))):
        return Fraction(0)
    rest = [s[i] - m[i] for i in range(len(s.counts))]
    rest_size = sum(rest)
    num = m.lr_size * factorial(m.length) * factorial(rest_size)
    den = factorial(s.size) * rest_size
    prod = 1
    for i in range(1, len(m.m)):
        prod *= comb(s[i], m[i]) * i ** m[i]
    return Fraction(num * prod, den)


def feasible_compositions(s: DegreeSequence) -> Iterator[BranchComposition]:
    """Every ``m`` with ``m_0 = 0`` and ``m_i <= n_i``."""
    ranges = [range(s[i] + 1) for i in range(1, len(s.counts))]
    for combo in itertools.product(*ranges):
        yield BranchComposition((0,) + combo)


def contents_with_composition(m: BranchComposition) -> Iterator[tuple[tuple[int, int], ...]]:
    """The set ``J^m`` of branch contents with composition ``m``."""
    degs = [i for i, k in enumerate(m.m) for _ in range(k)]
    for order in sorted(set(itertools.permutations(degs))):
        for idx in itertools.product(*(range(1, d + 1) for d in order)):
            yield tuple(zip(order, idx))


# -- right-of-branch discrepancy -------------------------------------------

def uniform_sum_pmf(m: BranchComposition | Sequence[int]) -> dict[int, Fraction]:
    """Exact law of ``sum_j sum_{k<=m_j} U_j^(k)`` with ``U_j`` uniform on ``{0..j-1}``."""
    if not isinstance(m, BranchComposition):
        m = BranchComposition(tuple(m))
    ways = [1]
    for j, mj in enumerate(m.m):
        for _ in range(mj):
            new = [0] * (len(ways) + j - 1)
            for r, w in enumerate(ways):
                if w:
                    for u in range(j):
                        new[r + u] += w
            ways = new
    total = sum(ways)
    return {r: Fraction(w, total) for r, w in enumerate(ways) if w}


def r_discrepancy_law(
    m: BranchComposition | Sequence[int],
    sigma2,
    x,
    samples: int | None = None,
    seed=None,
):
    """``P(|sum U - (sigma2/2)|m|| >= x)``.

    Exact (a :class:`~fractions.Fraction`) by convolution when
    ``sum_j j*m_j <= 10**4`` and ``samples`` is not given; otherwise a Monte
    Carlo estimate from ``samples`` draws.
    """
    if not isinstance(m, BranchComposition):
        m = BranchComposition(tuple(m))
    sigma2 = Fraction(sigma2) if not isinstance(sigma2, float) else sigma2
    centre = sigma2 / 2 * m.length
    work = sum(j * mj for j, mj in enumerate(m.m))
    if samples is None:
        if work > 10**4:
            raise ValueError("composition too large for the exact convolution; pass samples=")
        x = Fraction(x) if not isinstance(x, float) else x
        return sum((p for r, p in uniform_sum_pmf(m).items() if abs(r - centre) >= x), Fraction(0))
    rng = make_rng(seed)
    total = np.zeros(samples, dtype=np.int64)
    for j, mj in enumerate(m.m):
        if j >= 2 and mj:
            total += rng.integers(0, j, size=(samples, mj)).sum(axis=1)
    return float(np.mean(np.abs(total - float(centre)) >= float(x)))


# -- content uniformity ----------------------------------------------------

@dataclass
class ContentReport:
    status: str  # "pass", "fail" or "inconclusive"
    conditioned: int
    cells: int
    chi_square: ChiSquareReport | None

    def as_dict(self) -> dict:
        return {
            "status": self.status,
            "conditioned": self.conditioned,
            "cells": self.cells,
            "chi_square": self.chi_square.as_dict() if self.chi_square else None,
        }


def content_conditional_uniformity_check(
    s: DegreeSequence,
    m: BranchComposition | Sequence[int],
    samples: int,
    seed,
    alpha: float = 1e-3,
) -> ContentReport:
    """Chi-square test that the content is uniform on ``J^m`` given ``M = m``."""
    if not isinstance(m, BranchComposition):
        m = BranchComposition(tuple(m))
    if prob_composition(s, m) == 0:
        raise ValueError(f"composition {m.m} is impossible under {s}")
    cells = list(contents_with_composition(m))
    assert len(cells) == count_branch_contents(m.m)
    rng = make_rng(seed)
    observed = []
    for _ in range(samples):
        mt = sample_marked(s, rng)
        if branch_composition(mt) == m:
            observed.append(branch_content(mt))
    if len(cells) == 1:
        status = "pass" if observed else "inconclusive"
        return ContentReport(status, len(observed), 1, None)
    if len(observed) < 5 * len(cells):
        return ContentReport("inconclusive", len(observed), len(cells), None)
    counts = Counter(observed)
    report = chi_square_uniformity([counts.get(c, 0) for c in cells], alpha)
    if sum(counts.values()) != sum(counts.get(c, 0) for c in cells):
        return ContentReport("fail", len(observed), len(cells), report)
    return ContentReport("pass" if report.passed else "fail", len(observed), len(cells), report)
