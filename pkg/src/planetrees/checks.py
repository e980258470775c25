"""Exhaustive self-checks over every tree degree sequence up to a size bound."""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass
from fractions import Fraction

from .backbone import (
    branch_composition,
    branch_content,
    contents_with_composition,
    decompose,
    prob_composition,
    r_set,
    recompose,
    uniform_sum_pmf,
)
from .degseq import DegreeSequence, count_forests
from .oracle import all_tree_sequences, enumerate_trees
from .sampler import MarkedTree
from .tree_core import PlaneTree, ancestors, height, lukasiewicz


@dataclass
class CheckResult:
    name: str
    passed: bool
    cases: int
    detail: str = ""


def check_counts(max_size: int) -> CheckResult:
    bad, cases = [], 0
    for s in all_tree_sequences(max_size):
        cases += 1
        got = len(enumerate_trees(s, cap=max_size))
        if got != count_forests(s):
            bad.append(f"{s}: {got} != {count_forests(s)}")
    return CheckResult("counts", not bad, cases, "; ".join(bad[:3]))


def path_identities_hold(t: PlaneTree) -> bool:
    """``H(k) = |u_{k+1}|`` and ``S(k) = |R(u_k)| + c(u_k) - 1`` at every ``k``."""
    H = height(t).values
    S = lukasiewicz(t).values
    n = len(t)
    for k in range(n):
        if H[k] != len(ancestors(t, k + 1)):
            return False
    if S[0] != 0:
        return False
    for k in range(1, n + 1):
        if S[k] != len(r_set(MarkedTree(t, k))) + int(t.child_counts[k - 1]) - 1:
            return False
    return True


def check_path_identities(max_size: int) -> CheckResult:
    cases, bad = 0, []
    for s in all_tree_sequences(max_size):
        for t in enumerate_trees(s, cap=max_size).trees:
            cases += 1
            if not path_identities_hold(t):
                bad.append(str(t.key()))
    return CheckResult("path-identities", not bad, cases, "; ".join(bad[:3]))


def _marked(s: DegreeSequence, cap: int):
    for t in enumerate_trees(s, cap=cap).trees:
        for u in range(1, len(t) + 1):
            yield MarkedTree(t, u)


def composition_law_matches(s: DegreeSequence, cap: int) -> bool:
    freq = Counter(branch_composition(mt) for mt in _marked(s, cap))
    total = sum(freq.values())
    if sum(prob_composition(s, m) for m in freq) != 1:
        return False
    return all(Fraction(c, total) == prob_composition(s, m) for m, c in freq.items())


def content_law_matches(s: DegreeSequence, cap: int) -> bool:
    """Given the composition, the content is uniform on its whole content set and
    ``|R|`` has the uniform-sum law."""
    by_m: dict = defaultdict(Counter)
    r_by_m: dict = defaultdict(Counter)
    for mt in _marked(s, cap):
        m = branch_composition(mt)
        by_m[m][branch_content(mt)] += 1
        r_by_m[m][len(r_set(mt))] += 1
    for m, contents in by_m.items():
        cells = set(contents_with_composition(m))
        if set(contents) != cells or len(set(contents.values())) != 1:
            return False
        total = sum(r_by_m[m].values())
        law = {r: Fraction(c, total) for r, c in r_by_m[m].items()}
        if law != uniform_sum_pmf(m):
            return False
    return True


def check_composition_law(max_size: int) -> CheckResult:
    seqs = all_tree_sequences(max_size)
    bad = [str(s) for s in seqs if not composition_law_matches(s, max_size)]
    return CheckResult("composition-law", not bad, len(seqs), "; ".join(bad[:3]))


def check_content_law(max_size: int) -> CheckResult:
    seqs = all_tree_sequences(max_size)
    bad = [str(s) for s in seqs if not content_law_matches(s, max_size)]
    return CheckResult("content-law", not bad, len(seqs), "; ".join(bad[:3]))


def check_bijection(max_size: int) -> CheckResult:
    cases, bad = 0, []
    for s in all_tree_sequences(max_size):
        seen = set()
        for mt in _marked(s, max_size):
            cases += 1
            d = decompose(mt)
            if recompose(d) != mt:
                bad.append(f"{mt.key()}")
            seen.add((d.content, tuple(t.key() for t in d.forest)))
        if len(seen) != s.size * count_forests(s):
            bad.append(f"{s}: decompositions not distinct")
    return CheckResult("bijection", not bad, cases, "; ".join(bad[:3]))


def run_all(max_size: int = 8) -> list[CheckResult]:
    return [
        check_counts(max_size),
        check_path_identities(max_size),
        check_composition_law(max_size),
        check_content_law(max_size),
        check_bijection(max_size),
    ]
