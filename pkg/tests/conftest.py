import pytest
from hypothesis import strategies as st

from planetrees.degseq import validate
from planetrees.tree_core import PlaneTree

# {root, 1, 11, 12, 13, 14, 15, 131, 151, 152} in depth-first order
EXAMPLE_TREE = (1, 5, 0, 0, 1, 0, 0, 2, 0, 0)


@pytest.fixture
def example_tree():
    return PlaneTree(EXAMPLE_TREE)


@st.composite
def tree_sequences(draw, max_internal=7, max_degree=4):
    """Valid tree degree sequences built from a list of internal degrees."""
    internal = draw(st.lists(st.integers(1, max_degree), max_size=max_internal))
    n = 1 + sum(internal)
    counts = [0] * (max(internal, default=0) + 1)
    counts[0] = n - len(internal)
    for d in internal:
        counts[d] += 1
    return validate(counts)


def pytest_terminal_summary(terminalreporter):
    try:
        import test_acceptance as acc
    except ImportError:
        return
    if not acc.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(acc.RESULTS):
        terminalreporter.write_line(acc.format_line(k))
