"""Degree sequences of plane trees and forests, with exact counting.

A degree sequence ``(n_0, n_1, ..., n_D)`` lists how many nodes have exactly
``i`` children.  A forest with that sequence has ``|s| - sum(i * n_i)`` roots;
a tree is the one-root case.  Everything here is exact: counts are Python
integers and probabilities are :class:`fractions.Fraction`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import factorial, prod
from pathlib import Path
from typing import Iterable, Sequence

# Guards dense storage against pathological input (e.g. a single huge degree).
MAX_DEGREE = 2**20


class DegreeSequenceError(ValueError):
    """Raised for counts that are not the degree sequence of a tree or forest."""


@lru_cache(maxsize=4096)
def _factorial(k: int) -> int:
    return factorial(k)


def multinomial(parts: Iterable[int]) -> int:
    """Exact multinomial coefficient ``(sum parts)! / prod(part!)``."""
    parts = list(parts)
    total = _factorial(sum(parts))
    return total // prod(_factorial(p) for p in parts)


def _trim(counts: Sequence[int]) -> tuple[int, ...]:
    counts = list(counts)
    while len(counts) > 1 and counts[-1] == 0:
        counts.pop()
    return tuple(counts)


@dataclass(frozen=True)
class DegreeSequence:
    """Immutable degree sequence; equality ignores trailing zeros."""

    counts: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "counts", _trim(self.counts))

    @property
    def size(self) -> int:
        return sum(self.counts)

    @property
    def roots(self) -> int:
        return self.size - sum(i * n for i, n in enumerate(self.counts))

    @property
    def is_tree(self) -> bool:
        return self.roots == 1

    @property
    def max_degree(self) -> int:
        return max((i for i, n in enumerate(self.counts) if n > 0), default=0)

    def __getitem__(self, i: int) -> int:
        return self.counts[i] if 0 <= i < len(self.counts) else 0

    def __len__(self) -> int:
        return len(self.counts)

    def child_counts(self) -> list[int]:
        """The multiset of child counts, one entry per node, sorted."""
        out: list[int] = []
        for i, n in enumerate(self.counts):
            out.extend([i] * n)
        return out

    def to_json(self) -> dict:
        return {"counts": list(self.counts)}

    def __str__(self) -> str:
        return "(" + ",".join(map(str, self.counts)) + ")"


@dataclass(frozen=True)
class DegStats:
    p: tuple[Fraction, ...]
    sigma2: Fraction
    delta: int


def validate(counts: Sequence[int]) -> DegreeSequence:
    """Check ``counts`` and return a :class:`DegreeSequence`.

    Accepts any forest sequence (``roots >= 1``); use ``.is_tree`` to tell
    trees apart.
    """
    counts = list(counts)
    if not counts:
        raise DegreeSequenceError("empty degree sequence")
    for i, n in enumerate(counts):
        if isinstance(n, bool) or int(n) != n:
            raise DegreeSequenceError(f"count n_{i}={n!r} is not an integer")
        if n < 0:
            raise DegreeSequenceError(f"count n_{i}={n} is negative")
    s = DegreeSequence(tuple(int(n) for n in counts))
    if s.max_degree > MAX_DEGREE:
        raise DegreeSequenceError(f"maximum degree {s.max_degree} exceeds cap {MAX_DEGREE}")
    if s.size < 1:
        raise DegreeSequenceError("degree sequence has no nodes")
    if s.roots <= 0:
        raise DegreeSequenceError(
            f"root count |s| - sum(i*n_i) = {s.roots} must be >= 1 for {s}"
        )
    return s


def require_tree(s: DegreeSequence) -> DegreeSequence:
    if not s.is_tree:
        raise DegreeSequenceError(f"{s} is a forest sequence with {s.roots} roots, not a tree")
    return s


def stats(s: DegreeSequence) -> DegStats:
    """Empirical degree law ``p_i = n_i/|s|`` and ``sigma2 = sum_{i>=1} i^2 n_i/(|s|-1) - 1``."""
    n = s.size
    if n < 2:
        raise DegreeSequenceError("sigma2 is undefined for a single node (|s| - 1 = 0)")
    p = tuple(Fraction(c, n) for c in s.counts)
    sigma2 = Fraction(sum(i * i * c for i, c in enumerate(s.counts)), n - 1) - 1
    return DegStats(p=p, sigma2=sigma2, delta=s.max_degree)


def count_forests(s: DegreeSequence) -> int:
    """Number of ordered forests of plane trees with degree sequence ``s``.

    ``(r/|s|) * |s|! / prod(n_i!)``; for a tree sequence this is ``#T_s``.
    """
    if s.roots < 1:
        raise DegreeSequenceError(f"{s} has no roots")
    num = s.roots * multinomial(s.counts)
    q, rem = divmod(num, s.size)
    assert rem == 0
    return q


def count_branch_contents(m: Sequence[int]) -> int:
    """Size of the set of branch contents with composition ``m``.

    A content is an ordered list of ``(degree, child index)`` pairs; there are
    ``multinomial(m) * prod(i ** m_i)`` of them.
    """
    m = list(m)
    if m and m[0] != 0:
        raise DegreeSequenceError(f"branch composition must have m_0 = 0, got {m[0]}")
    if any(x < 0 for x in m):
        raise DegreeSequenceError("branch composition has a negative entry")
    return multinomial(m) * prod(i**mi for i, mi in enumerate(m))


def parse(spec: str | Path | Sequence[int]) -> DegreeSequence:
    """Read a degree sequence from inline text "3,1,2", a JSON file, or a list."""
    if isinstance(spec, (list, tuple)):
        return validate(spec)
    text = str(spec).strip()
    if text.startswith(("{", "[")):
        try:
            return _from_json(json.loads(text))
        except json.JSONDecodeError as exc:
            raise DegreeSequenceError(f"malformed JSON degree sequence ({exc.msg})") from None
    path = Path(text)
    if path.suffix == ".json" or path.is_file():
        try:
            data = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise DegreeSequenceError(f"{path}: malformed JSON ({exc.msg})") from None
        except OSError as exc:
            raise DegreeSequenceError(f"cannot read {path}: {exc.strerror}") from None
        return _from_json(data)
    try:
        return validate([int(x) for x in text.strip("()").split(",") if x.strip()])
    except ValueError as exc:
        if isinstance(exc, DegreeSequenceError):
            raise
        raise DegreeSequenceError(f"cannot parse degree sequence {text!r}; expected e.g. 3,1,2") from None


def _from_json(data) -> DegreeSequence:
    if isinstance(data, dict) and "counts" in data:
        data = data["counts"]
    if not isinstance(data, list):
        raise DegreeSequenceError('degree sequence JSON must look like {"counts": [3,1,2]}')
    return validate(data)
