"""Acceptance criteria 1-12, each at its stated tolerance.

Run with ``pytest tests/test_acceptance.py -v``; a PASS/FAIL line per
criterion is printed in the terminal summary.  ``python
tests/test_acceptance.py`` prints the same lines without pytest.
"""

from __future__ import annotations

import math
import time
from collections import Counter
from fractions import Fraction
from functools import lru_cache

import pytest

from planetrees.checks import (
    check_bijection,
    check_content_law,
    check_counts,
    check_path_identities,
    composition_law_matches,
)
from planetrees.coalescent import coalesce_labelled, coalesce_plane, labelled_tree_probability
from planetrees.degseq import count_forests, validate
from planetrees.limits import (
    discrepancy_decay,
    excursion_reference,
    gw_hypothesis_check,
    height_samples,
    ks_two_sample,
)
from planetrees.oracle import (
    chi_square_uniformity,
    enumerate_rooted_labelled,
    enumerate_trees,
    labelled_child_counts,
    labelled_counts_by_degseq,
    tally,
)
from planetrees.sampler import OffspringDistribution, make_rng, sample_uniform

SEED = 20240917
ALPHA = 1e-3
BIG_N = 10**5
REPLICAS = 2000

RESULTS: dict[int, tuple[bool, str]] = {}


def record(number: int, passed: bool, detail: str) -> bool:
    RESULTS[number] = (bool(passed), detail)
    return bool(passed)


# -- exact criteria --------------------------------------------------------------

def criterion_1():
    s = validate([3, 1, 2])
    t0 = time.perf_counter()
    formula, enumerated = count_forests(s), len(enumerate_trees(s))
    took = time.perf_counter() - t0
    ok = formula == enumerated == 10 and took < 1
    return record(1, ok, f"formula={formula} enumerated={enumerated} in {took:.3f}s")


def criterion_2():
    t0 = time.perf_counter()
    res = check_counts(10)
    took = time.perf_counter() - t0
    return record(2, res.passed and took < 120, f"{res.cases} sequences with |s| <= 10 in {took:.1f}s {res.detail}")


def criterion_3():
    s = validate([3, 1, 2])
    cells = [t.key() for t in enumerate_trees(s).trees]
    rng = make_rng(SEED)
    t0 = time.perf_counter()
    obs = tally((sample_uniform(s, rng).key() for _ in range(BIG_N)), cells)
    took = time.perf_counter() - t0
    rep = chi_square_uniformity(obs, ALPHA)
    return record(3, rep.passed and took < 5,
                  f"chi2={rep.statistic:.2f} dof={rep.dof} p={rep.p_value:.4f} in {took:.1f}s")


def criterion_4():
    seqs = [validate([2, 0, 1]), validate([3, 1, 2]), validate([4, 1, 1, 1])]
    t0 = time.perf_counter()
    ok = all(composition_law_matches(s, 12) for s in seqs)
    took = time.perf_counter() - t0
    return record(4, ok and took < 10, f"exact rational match on 3 sequences in {took:.2f}s")


def criterion_5():
    t0 = time.perf_counter()
    res = check_content_law(8)
    took = time.perf_counter() - t0
    return record(5, res.passed and took < 30, f"{res.cases} sequences with |s| <= 8 in {took:.2f}s {res.detail}")


def criterion_6():
    t0 = time.perf_counter()
    res = check_path_identities(8)
    took = time.perf_counter() - t0
    return record(6, res.passed and took < 60, f"{res.cases} trees with |s| <= 8 in {took:.2f}s {res.detail}")


def criterion_7():
    t0 = time.perf_counter()
    res = check_bijection(8)
    took = time.perf_counter() - t0
    return record(7, res.passed and took < 60, f"{res.cases} marked trees in {took:.2f}s {res.detail}")


# -- Monte Carlo criteria ----------------------------------------------------------

def criterion_8():
    rep = discrepancy_decay(["binary", "geometric-like"], [10**3, 10**4, 10**5], 200, SEED)
    parts, ok = [], True
    for fam, row in rep.items():
        fam_ok = row["strictly_decreasing"] and row["last_over_first"] < 0.6
        ok &= fam_ok
        meds = ", ".join(f"{m:.4f}" for m in row["medians"])
        parts.append(f"{fam}: medians [{meds}] ratio {row['last_over_first']:.3f}")
    return record(8, ok, "; ".join(parts))


@lru_cache(maxsize=None)
def _binary_heights():
    return height_samples("binary", BIG_N, REPLICAS, SEED, ("max", "value@0.5"))


def criterion_9():
    trees = _binary_heights()["max"]
    dyck = excursion_reference(BIG_N, REPLICAS, SEED, ("max",))["max"]
    r = ks_two_sample(trees, dyck)
    return record(9, r.statistic < 0.05 and not r.inconclusive, f"KS={r.statistic:.4f} p={r.p_value:.3f}")


def criterion_10():
    a = _binary_heights()
    b = height_samples("unary-ternary", BIG_N, REPLICAS, SEED, ("max", "value@0.5"))
    parts, ok = [], True
    for name in ("max", "value@0.5"):
        r = ks_two_sample(a[name], b[name])
        ok &= r.statistic < 0.05 and not r.inconclusive
        parts.append(f"{name}: KS={r.statistic:.4f} p={r.p_value:.3f}")
    return record(10, ok, "binary vs unary-ternary; " + "; ".join(parts))


def criterion_11():
    t0 = time.perf_counter()
    # (a) plane coalescent against the catalogue
    s = validate([3, 1, 2])
    cells = [t.key() for t in enumerate_trees(s).trees]
    rng = make_rng(SEED)
    rep = chi_square_uniformity(tally((coalesce_plane(s, rng).key() for _ in range(BIG_N)), cells), ALPHA)
    # (b) exact probability against labelled enumeration, n <= 7
    exact_ok = all(labelled_tree_probability(seq) == Fraction(1, c)
                   for n in range(1, 8) for seq, c in labelled_counts_by_degseq(n).items())
    # (c) empirical frequencies at n = 5 for s = (3,1,0,1)
    s5 = validate([3, 1, 0, 1])
    trees5 = {}
    for par in enumerate_rooted_labelled(5):
        if Counter(labelled_child_counts(par)) == Counter({0: 3, 1: 1, 3: 1}):
            trees5[tuple(0 if p < 0 else p + 1 for p in par)] = 0
    p = labelled_tree_probability(s5)
    rng = make_rng(SEED + 1)
    for _ in range(BIG_N):
        trees5[coalesce_labelled(s5.child_counts(), rng).parent[1:]] += 1
    se = math.sqrt(float(p) * (1 - float(p)) / BIG_N)
    worst = max(abs(c / BIG_N - float(p)) / se for c in trees5.values())
    freq_ok = len(trees5) == 1 / p == 80 and worst <= 3
    took = time.perf_counter() - t0
    ok = rep.passed and exact_ok and freq_ok and took < 120
    return record(11, ok, f"plane chi2 p={rep.p_value:.4f}; labelled counts n<=7 {'ok' if exact_ok else 'MISMATCH'}; "
                          f"{len(trees5)} labelled trees, worst deviation {worst:.2f} SE; {took:.1f}s")


def criterion_12():
    rep = gw_hypothesis_check(OffspringDistribution.geometric(), [10**2, 10**4], 200, SEED)
    lo, hi = rep["medians"]["100"], rep["medians"]["10000"]
    ok = rep["sigma2_err_decreases"] and rep["delta_decreases"]
    return record(12, ok, f"|sigma2 err| {lo['sigma2_err']:.4f} -> {hi['sigma2_err']:.4f}; "
                          f"Delta/sqrt(n) {lo['delta_over_sqrt_n']:.4f} -> {hi['delta_over_sqrt_n']:.4f}")


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
            criterion_7, criterion_8, criterion_9, criterion_10, criterion_11, criterion_12]


@pytest.mark.parametrize("number", range(1, 13), ids=lambda k: f"criterion_{k}")
def test_criterion(number):
    assert CRITERIA[number - 1](), RESULTS[number][1]


def format_line(number: int) -> str:
    passed, detail = RESULTS[number]
    return f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"


if __name__ == "__main__":
    for k, fn in enumerate(CRITERIA, 1):
        try:
            fn()
        except Exception as exc:  # report and keep going
            record(k, False, f"error: {exc}")
        print(format_line(k), flush=True)
