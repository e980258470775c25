from fractions import Fraction

import pytest
from hypothesis import given

from planetrees.degseq import (
    DegreeSequence,
    DegreeSequenceError,
    count_branch_contents,
    count_forests,
    multinomial,
    parse,
    stats,
    validate,
)

from conftest import tree_sequences


def test_validate_examples():
    s = validate([3, 1, 2])
    assert (s.size, s.roots, s.is_tree) == (6, 1, True)
    one = validate([1])
    assert (one.size, one.roots) == (1, 1)
    f = validate([2, 1])
    assert (f.size, f.roots, f.is_tree) == (3, 2, False)


def test_trailing_zeros_trimmed():
    assert validate([3, 1, 2, 0, 0]).counts == (3, 1, 2)
    assert validate([3, 1, 2, 0]) == validate([3, 1, 2])


@pytest.mark.parametrize("bad", [[], [-1, 2], [0], [0, 1], [1, 0, 1], [2.5]])
def test_validate_rejects(bad):
    with pytest.raises(DegreeSequenceError):
        validate(bad)


def test_stats_examples():
    st = stats(validate([3, 1, 2]))
    assert st.p == (Fraction(1, 2), Fraction(1, 6), Fraction(1, 3))
    assert st.sigma2 == Fraction(4, 5)
    assert st.delta == 2
    assert stats(validate([2, 0, 1])).sigma2 == 1


def test_stats_single_node_undefined():
    with pytest.raises(DegreeSequenceError):
        stats(validate([1]))


def test_count_forests_examples():
    assert count_forests(validate([3, 1, 2])) == 10
    assert count_forests(validate([1])) == 1
    assert count_forests(validate([4, 0, 3])) == 5


def test_branch_content_counts():
    assert count_branch_contents([0, 1, 2]) == 12
    assert count_branch_contents([0]) == 1
    assert count_branch_contents([]) == 1
    assert count_branch_contents([0, 0, 1]) == 2
    with pytest.raises(DegreeSequenceError):
        count_branch_contents([1, 1])


def test_multinomial_big_ints():
    assert multinomial([50, 50]) == 100891344545564193334812497256
    assert multinomial([]) == 1


def test_parse_forms(tmp_path):
    target = validate([3, 1, 2])
    assert parse("3,1,2") == target
    assert parse("(3,1,2)") == target
    assert parse('{"counts":[3,1,2]}') == target
    p = tmp_path / "s.json"
    p.write_text('{"counts": [3, 1, 2]}')
    assert parse(p) == target
    assert parse([3, 1, 2]) == target


@pytest.mark.parametrize("bad", ["3,x,2", "{not json", '{"foo": 1}'])
def test_parse_errors(bad):
    with pytest.raises(DegreeSequenceError):
        parse(bad)


@given(tree_sequences())
def test_tree_identity(s: DegreeSequence):
    assert s.size == 1 + sum(i * k for i, k in enumerate(s.counts))
    assert sum(stats(s).p) == 1 if s.size > 1 else True
