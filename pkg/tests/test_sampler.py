import itertools
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings

from planetrees.degseq import DegreeSequenceError, validate
from planetrees.oracle import chi_square_uniformity, enumerate_marked, enumerate_trees, tally
from planetrees.sampler import (
    FeasibilityError,
    MarkedTree,
    OffspringDistribution,
    _rotate_to_excursion,
    erase_unary,
    insert_unary,
    make_rng,
    replica_seeds,
    sample_gw_conditioned,
    sample_marked,
    sample_uniform,
    sample_uniform_forest,
)
from planetrees.tree_core import PlaneTree, degree_sequence

from conftest import tree_sequences


def test_seed_required():
    with pytest.raises(ValueError):
        make_rng(None)
    with pytest.raises(ValueError):
        make_rng(-3)


def test_same_seed_same_tree():
    s = validate([31, 10, 10, 5, 2, 1])
    assert sample_uniform(s, 11) == sample_uniform(s, 11)
    a = [sample_uniform(s, q) for q in replica_seeds(5, 4)]
    b = [sample_uniform(s, q) for q in replica_seeds(5, 4)]
    assert a == b


def test_trivial_sequences():
    assert sample_uniform(validate([1]), 0).key() == (0,)
    assert sample_marked(validate([1]), 0) == MarkedTree(PlaneTree([0]), 1)
    with pytest.raises(DegreeSequenceError):
        sample_uniform(validate([2, 1]), 0)


def test_every_rotation_class_of_201_gives_the_tree():
    target = (2, 0, 0)
    for perm in set(itertools.permutations([2, 0, 0])):
        inc = np.array(perm) - 1
        assert tuple(_rotate_to_excursion(inc) + 1) == target


def test_cycle_lemma_exhaustive_on_small_multiset():
    # every arrangement of the child counts maps onto T_s, each tree hit |s| times per class size
    s = validate([4, 1, 1, 1])
    counts = Counter()
    for perm in itertools.permutations([0, 0, 0, 0, 1, 2, 3]):
        counts[tuple(_rotate_to_excursion(np.array(perm) - 1) + 1)] += 1
    cat = enumerate_trees(s)
    assert set(counts) == {t.key() for t in cat.trees}
    assert len(set(counts.values())) == 1


@settings(max_examples=80, deadline=None)
@given(tree_sequences())
def test_sampled_tree_has_requested_degrees(s):
    assert degree_sequence(sample_uniform(s, 1)) == s


def test_marked_uniform_on_312():
    s = validate([3, 1, 2])
    cells = [m.key() for m in enumerate_marked(s)]
    assert len(cells) == 60
    rng = make_rng(2024)
    obs = tally((sample_marked(s, rng).key() for _ in range(60_000)), cells)
    assert chi_square_uniformity(obs, 1e-3).passed


def test_forest_sampler_uniform():
    s = validate([3, 1])  # 3 roots; the unary node sits on one of them
    rng = make_rng(9)
    draws = Counter(tuple(t.key() for t in sample_uniform_forest(s, rng)) for _ in range(20_000))
    assert set(draws) == {
        ((1, 0), (0,), (0,)),
        ((0,), (1, 0), (0,)),
        ((0,), (0,), (1, 0)),
    }
    assert chi_square_uniformity(list(draws.values())).passed


def test_insert_unary_examples():
    assert insert_unary(PlaneTree([2, 0, 0]), 0, 1).key() == (2, 0, 0)
    for seed in range(5):
        assert insert_unary(PlaneTree([0]), 2, seed).key() == (1, 1, 0)
    with pytest.raises(ValueError):
        insert_unary(PlaneTree([1, 0]), 1, 0)


def test_insert_unary_composite_law_is_uniform():
    s = validate([3, 2, 2])
    s_star = validate([3, 0, 2])
    cells = [t.key() for t in enumerate_trees(s).trees]
    rng = make_rng(77)
    obs = tally((insert_unary(sample_uniform(s_star, rng), 2, rng).key() for _ in range(30_000)), cells)
    assert chi_square_uniformity(obs, 1e-3).passed


def test_erase_unary():
    t = PlaneTree([1, 2, 1, 0, 0])
    assert erase_unary(t).key() == (2, 0, 0)


def test_gw_parity_infeasible():
    mu = OffspringDistribution(probabilities=(0.5, 0, 0.5))
    with pytest.raises(FeasibilityError):
        sample_gw_conditioned(mu, 4, 0, max_attempts=2000)
    assert len(sample_gw_conditioned(mu, 5, 0)) == 5


def test_gw_single_node():
    assert sample_gw_conditioned(OffspringDistribution.geometric(), 1, 3).key() == (0,)


def test_gw_conditionally_uniform_given_degrees():
    mu = OffspringDistribution.geometric()
    rng = make_rng(31)
    by_s: dict = {}
    for _ in range(20_000):
        t = sample_gw_conditioned(mu, 7, rng)
        by_s.setdefault(degree_sequence(t), []).append(t.key())
    tested = 0
    for s, keys in by_s.items():
        cells = [t.key() for t in enumerate_trees(s).trees]
        if len(cells) < 2 or len(keys) < 10 * len(cells):
            continue
        assert chi_square_uniformity(tally(keys, cells), 1e-3).passed, s
        tested += 1
    assert tested >= 3


def test_offspring_law():
    g = OffspringDistribution.geometric()
    assert g.mean == pytest.approx(1) and g.variance == pytest.approx(2)
    b = OffspringDistribution(probabilities=(0.5, 0, 0.5))
    assert b.variance == pytest.approx(1)
    assert OffspringDistribution.from_json(b.to_json()) == b
    with pytest.raises(ValueError):
        OffspringDistribution(probabilities=(0.5, 0.4))
    with pytest.raises(ValueError):
        OffspringDistribution(probabilities=(0.2, 0.8)).check_critical()
