"""Plane trees stored as depth-first child-count sequences, and their encodings.

A plane tree with ``n`` nodes is the sequence ``c_1, ..., c_n`` of child
counts of its nodes listed in lexicographic (depth-first) order.  The
sequence is valid iff the partial sums of ``c_j - 1`` stay non-negative
until the last step, where they hit ``-1``.

Nodes are addressed by their 1-based depth-first rank.  Parent, child-index
and subtree-size arrays are built on first use and cached on the instance.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .degseq import DegreeSequence

HEIGHT, CONTOUR, LUKASIEWICZ = "height", "contour", "lukasiewicz"


class InvalidTreeError(ValueError):
    pass


class PlaneTree:
    """Immutable plane tree; ``child_counts`` is a read-only int64 array."""

    __slots__ = ("child_counts", "_cache", "_lock")

    def __init__(self, child_counts, *, _trusted: bool = False):
        arr = np.array(child_counts, dtype=np.int64)
        if arr.ndim != 1:
            raise InvalidTreeError("child counts must be a flat sequence")
        if not _trusted:
            _check_excursion(arr)
        arr.flags.writeable = False
        self.child_counts = arr
        self._cache: dict = {}
        self._lock = threading.RLock()

    def __len__(self) -> int:
        return len(self.child_counts)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PlaneTree):
            return NotImplemented
        return np.array_equal(self.child_counts, other.child_counts)

    def __hash__(self) -> int:
        return hash(self.child_counts.tobytes())

    def __repr__(self) -> str:
        if len(self) <= 20:
            return f"PlaneTree({self.key()})"
        return f"PlaneTree(<{len(self)} nodes>)"

    def key(self) -> tuple[int, ...]:
        return tuple(int(c) for c in self.child_counts)

    def to_json(self) -> dict:
        return {"child_counts": self.key()}

    def _cached(self, name, build):
        # One-time initialisation; readers never see a partially built array.
        value = self._cache.get(name)
        if value is None:
            with self._lock:
                value = self._cache.get(name)
                if value is None:
                    value = build()
                    if isinstance(value, np.ndarray):
                        value.flags.writeable = False
                    self._cache[name] = value
        return value

    @property
    def depths(self) -> np.ndarray:
        """Depth of every node, in depth-first order (0-based positions)."""
        return self._cached("depths", lambda: _structure(self.child_counts)[0])

    @property
    def parents(self) -> np.ndarray:
        """0-based position of each node's parent; -1 for the root."""
        return self._cached("parents", lambda: _structure(self.child_counts)[1])

    @property
    def child_index(self) -> np.ndarray:
        """1-based index of each node among its siblings; 0 for the root."""
        return self._cached("child_index", lambda: _structure(self.child_counts)[2])

    @property
    def subtree_sizes(self) -> np.ndarray:
        return self._cached("sizes", self._build_sizes)

    def _build_sizes(self) -> np.ndarray:
        n = len(self)
        sizes = np.ones(n, dtype=np.int64)
        parents = self.parents
        for k in range(n - 1, 0, -1):
            sizes[parents[k]] += sizes[k]
        return sizes

    def children(self, u: int) -> list[int]:
        """Ranks of the children of node ``u``, left to right."""
        k = _pos(self, u)
        out, j = [], k + 1
        sizes = self.subtree_sizes
        for _ in range(int(self.child_counts[k])):
            out.append(j + 1)
            j += int(sizes[j])
        return out

    def subtree(self, u: int) -> PlaneTree:
        k = _pos(self, u)
        return PlaneTree(self.child_counts[k : k + int(self.subtree_sizes[k])], _trusted=True)


def _check_excursion(arr: np.ndarray) -> None:
    if len(arr) == 0:
        raise InvalidTreeError("a plane tree has at least one node")
    if (arr < 0).any():
        raise InvalidTreeError("child counts must be non-negative")
    walk = np.cumsum(arr - 1)
    if walk[-1] != -1:
        raise InvalidTreeError(
            f"Lukasiewicz walk ends at {int(walk[-1])}, expected -1 "
            f"({'missing' if walk[-1] > -1 else 'extra'} leaves)"
        )
    if len(arr) > 1 and walk[:-1].min() < 0:
        first = int(np.argmax(walk[:-1] < 0))
        raise InvalidTreeError(f"Lukasiewicz walk hits -1 early, after node {first + 1}")


def _structure(counts: np.ndarray):
    """Depths, parents and sibling indices by one stack pass."""
    n = len(counts)
    depth = [0] * n
    parent = [-1] * n
    index = [0] * n
    stack: list[int] = []  # ancestors whose subtree is not finished
    used: list[int] = []  # children already seen at each of them
    cl = counts.tolist()
    for k, c in enumerate(cl):
        if stack:
            depth[k] = len(stack)
            parent[k] = stack[-1]
            used[-1] += 1
            index[k] = used[-1]
        if c:
            stack.append(k)
            used.append(0)
        else:
            while stack and used[-1] == cl[stack[-1]]:
                stack.pop()
                used.pop()
    return (
        np.array(depth, dtype=np.int64),
        np.array(parent, dtype=np.int64),
        np.array(index, dtype=np.int64),
    )


def _pos(t: PlaneTree, u: int) -> int:
    if not isinstance(u, (int, np.integer)) or not 1 <= u <= len(t):
        raise IndexError(f"node rank {u!r} outside [1, {len(t)}]")
    return int(u) - 1


@dataclass(frozen=True)
class LatticePath:
    values: np.ndarray
    kind: str

    @property
    def span(self) -> int:
        return len(self.values) - 1

    def to_csv(self) -> str:
        rows = ["time,value"] + [f"{i},{int(v)}" for i, v in enumerate(self.values)]
        return "\n".join(rows) + "\n"

    def __eq__(self, other) -> bool:
        if not isinstance(other, LatticePath):
            return NotImplemented
        return self.kind == other.kind and np.array_equal(self.values, other.values)


def from_child_counts(counts: Sequence[int]) -> PlaneTree:
    return PlaneTree(counts)


def single_node() -> PlaneTree:
    return PlaneTree([0], _trusted=True)


def lukasiewicz(t: PlaneTree) -> LatticePath:
    """Depth-first walk ``S(i) = sum_{j<=i} (c_j - 1)`` on ``[0, n]``."""
    vals = np.concatenate(([0], np.cumsum(t.child_counts - 1)))
    return LatticePath(vals, LUKASIEWICZ)


def height(t: PlaneTree) -> LatticePath:
    """``H(i)`` = depth of the (i+1)-th node in depth-first order, on ``[0, n-1]``."""
    return LatticePath(t.depths.copy(), HEIGHT)


def contour(t: PlaneTree) -> LatticePath:
    """Depth along the walk around the tree: ``2(n-1)`` steps of +-1."""
    h = t.depths
    if len(h) == 1:
        return LatticePath(np.zeros(1, dtype=np.int64), CONTOUR)
    # Between consecutive depth-first nodes: climb h[k]-h[k+1]+1, then one step down.
    seg = h[:-1] - h[1:] + 2
    total = 2 * (len(h) - 1)
    steps = -np.ones(total, dtype=np.int64)
    steps[np.cumsum(seg) - 1] = 1
    vals = np.concatenate(([0], np.cumsum(steps)))
    return LatticePath(vals, CONTOUR)


def mirror(t: PlaneTree) -> PlaneTree:
    """Flip the order of the children of every node.

    The depth-first order of the mirror is the reversed post-order of ``t``.
    """
    n = len(t)
    if n == 1:
        return t
    sizes = t.subtree_sizes
    counts = t.child_counts
    # A node's block in the mirrored order starts right after its parent,
    # followed by the blocks of its siblings taken right to left.
    newpos = np.zeros(n, dtype=np.int64)
    for k in range(n):
        c = int(counts[k])
        if not c:
            continue
        kids = []
        j = k + 1
        for _ in range(c):
            kids.append(j)
            j += int(sizes[j])
        start = newpos[k] + 1
        for j in reversed(kids):
            newpos[j] = start
            start += int(sizes[j])
    out = np.empty(n, dtype=np.int64)
    out[newpos] = counts
    return PlaneTree(out, _trusted=True)


def depth(t: PlaneTree, u: int) -> int:
    return int(t.depths[_pos(t, u)])


def parent(t: PlaneTree, u: int) -> int:
    k = _pos(t, u)
    if k == 0:
        raise ValueError("the root has no parent")
    return int(t.parents[k]) + 1


def ancestors(t: PlaneTree, u: int) -> list[int]:
    """Strict ancestors of ``u`` from the root down (ranks)."""
    k = _pos(t, u)
    out = []
    par = t.parents
    while k > 0:
        k = int(par[k])
        out.append(k + 1)
    out.reverse()
    return out


def lca(t: PlaneTree, u: int, v: int) -> int:
    a, b = _pos(t, u), _pos(t, v)
    d, par = t.depths, t.parents
    while d[a] > d[b]:
        a = int(par[a])
    while d[b] > d[a]:
        b = int(par[b])
    while a != b:
        a, b = int(par[a]), int(par[b])
    return a + 1


def dist(t: PlaneTree, u: int, v: int) -> int:
    w = lca(t, u, v)
    return depth(t, u) + depth(t, v) - 2 * depth(t, w)


def degree_sequence(t: PlaneTree) -> DegreeSequence:
    return DegreeSequence(tuple(int(x) for x in np.bincount(t.child_counts)))


def node_word(t: PlaneTree, u: int) -> tuple[int, ...]:
    """The Ulam-Harris word of node ``u`` (sibling indices from the root)."""
    if _pos(t, u) == 0:
        return ()
    path = ancestors(t, u)[1:] + [u]
    return tuple(int(t.child_index[w - 1]) for w in path)


def rank_of_word(t: PlaneTree, word: Sequence[int]) -> int:
    u = 1
    for i in word:
        kids = t.children(u)
        if not 1 <= i <= len(kids):
            raise KeyError(f"word {tuple(word)} is not a node of the tree")
        u = kids[i - 1]
    return u
