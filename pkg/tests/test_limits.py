import math
from fractions import Fraction

import numpy as np
import pytest

from planetrees.backbone import r_set
from planetrees.degseq import stats, validate
from planetrees.limits import (
    ExperimentConfig,
    excursion_reference,
    family_sequence,
    gw_hypothesis_check,
    height_functionals,
    ks_two_sample,
    rescale,
    run_experiment,
    sup_discrepancy,
    uniform_dyck_path,
    universality_experiment,
)
from planetrees.oracle import enumerate_trees
from planetrees.sampler import MarkedTree, OffspringDistribution, make_rng, sample_uniform
from planetrees.tree_core import LatticePath, contour, height, lukasiewicz, mirror, single_node


def test_rescale_examples():
    r = rescale(height(single_node()), grid_points=5)
    assert r.values.tolist() == [0.0] * 5
    path = LatticePath(np.array([0, 1, 0]), "contour")  # tree with n = 2
    r = rescale(path, grid_points=3)
    assert r.values == pytest.approx([0, 1 / math.sqrt(2), 0])
    with pytest.raises(ValueError):
        rescale(path, grid_points=1)


def test_rescaled_max_is_exact_on_fine_grid():
    t = sample_uniform(validate([51, 0, 50]), 4)
    n = len(t)
    r = rescale(height(t), grid_points=n)
    assert r.values.max() == pytest.approx(t.depths.max() / math.sqrt(n))
    r = rescale(contour(t), sigma=1.0, grid_points=2 * (n - 1) + 1)
    assert r.values.max() == pytest.approx(t.depths.max() / (2 * math.sqrt(n)))


def test_sup_discrepancy_smallest_case():
    t = sample_uniform(validate([1, 1]), 0)
    assert lukasiewicz(t).values.tolist() == [0, 0, -1]
    assert math.isfinite(sup_discrepancy(t, 1))


def test_discrepancy_node_bound():
    # |S(k) - (sigma2/2) H(k-1)| and ||R(u_k)| - (sigma2/2)|u_k|| differ by at most Delta
    for s in [validate([4, 1, 1, 1]), validate([5, 1, 0, 2]), validate([4, 2, 0, 0, 1])]:
        half = stats(s).sigma2 / 2
        for t in enumerate_trees(s).trees:
            S, H = lukasiewicz(t).values, height(t).values
            for k in range(1, len(t) + 1):
                a = abs(int(S[k]) - half * int(H[k - 1]))
                b = abs(len(r_set(MarkedTree(t, k))) - half * int(H[k - 1]))
                assert abs(a - b) <= s.max_degree


def test_mirror_preserves_discrepancy_law_exactly():
    s = validate([7, 1, 1, 1, 1])
    sigma2 = stats(s).sigma2
    trees = enumerate_trees(s).trees
    a = sorted(round(sup_discrepancy(t, sigma2), 12) for t in trees)
    b = sorted(round(sup_discrepancy(mirror(t), sigma2), 12) for t in trees)
    assert a == b


def test_families_are_tree_sequences():
    for name in ("binary", "geometric-like", "unary-ternary"):
        for n in (10, 1000, 10**5):
            s = family_sequence(name, n)
            assert s.is_tree and abs(s.size - n) <= 3
    assert family_sequence("binary", 1001).counts == (501, 0, 500)
    assert family_sequence("empirical-gw", 200, seed=3).size == 200
    assert family_sequence("poisson", 200, seed=3).size == 200
    with pytest.raises(ValueError):
        family_sequence("poisson", 200)
    with pytest.raises(ValueError):
        family_sequence("nope", 10)


def test_geometric_like_approaches_geometric_law():
    s = family_sequence("geometric-like", 10**5)
    p = stats(s).p
    for i in range(5):
        assert abs(float(p[i]) - 2.0 ** (-i - 1)) < 0.01
    assert abs(float(stats(s).sigma2) - 2) < 0.05


def test_dyck_reference():
    rng = make_rng(0)
    assert uniform_dyck_path(1, rng).tolist() == [0, 1, 0]
    ref = excursion_reference(1, 3, seed=1, names=("max",))
    assert ref["max"].values == pytest.approx([1 / math.sqrt(2)] * 3)
    seen = {tuple(uniform_dyck_path(3, rng)) for _ in range(2000)}
    assert len(seen) == 5
    for p in seen:
        assert min(p) == 0 and p[-1] == 0 and set(np.diff(p)) <= {-1, 1}


def test_ks_examples():
    x = np.linspace(0, 1, 50)
    assert ks_two_sample(x, x).statistic == 0
    assert ks_two_sample(x, x + 2).statistic == 1
    assert ks_two_sample(x[:5], x[:5]).inconclusive


def test_height_functionals_of_path():
    t = sample_uniform(validate([1, 1]), 0)  # 2-node path, H = (0, 1)
    f = height_functionals(t, 2.0, ["max", "value@0.5", "area", "endpoint"])
    assert f == pytest.approx({"max": 1 / math.sqrt(2), "value@0.5": 0.5 / math.sqrt(2),
                               "area": 0.5 / math.sqrt(2), "endpoint": 1 / math.sqrt(2)})


def test_same_family_agrees_with_itself_small():
    res = universality_experiment(["binary", "binary"], 500, 40, seed=2)
    assert res["ks"]["max"]["statistic"] < 0.5
    assert not res["hypotheses"]["binary"]["hypothesis_violation"]


def test_gw_check_binary_law():
    mu = OffspringDistribution(probabilities=(0.5, 0, 0.5))
    rep = gw_hypothesis_check(mu, [101, 1001], 30, seed=5)
    assert rep["sigma2_mu"] == pytest.approx(1)
    assert rep["medians"]["1001"]["sigma2_err"] < 0.05
    with pytest.raises(ValueError):
        gw_hypothesis_check(OffspringDistribution(probabilities=(0.3, 0.7)), [10], 2, seed=1)


def test_run_experiment_reproducible():
    cfg = ExperimentConfig(kind="discrepancy", families=["binary"], sizes=[100, 400], replicas=8, seed=3)
    a, b = run_experiment(cfg), run_experiment(cfg)
    assert a["result"] == b["result"]
    assert a["config"]["seed"] == 3


def test_threads_do_not_change_results():
    cfg = dict(kind="excursion", families=["binary"], sizes=[301], replicas=6, seed=1, functionals=["max"])
    one = run_experiment(ExperimentConfig(**cfg))["result"]
    two = run_experiment(ExperimentConfig(**cfg, threads=2))["result"]
    assert one == two


def test_config_validation():
    with pytest.raises(ValueError):
        ExperimentConfig(kind="bogus")
    with pytest.raises(ValueError):
        ExperimentConfig(kind="discrepancy", sizes=[1000, 100])
    with pytest.raises(ValueError):
        ExperimentConfig(kind="discrepancy", functionals=["median"])
    with pytest.raises(ValueError):
        ExperimentConfig.from_dict({"kind": "discrepancy", "sizez": [10]})
