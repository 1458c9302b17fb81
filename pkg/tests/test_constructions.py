from math import comb

import numpy as np
import pytest

from linfchernoff.constructions import (
    build_counterexample,
    complete_graph,
    connected_small_graphs,
    product_distribution,
    random_distribution,
    reflection_residual,
    tree_distribution,
    uniform_k_subsets,
    verify_claim_B1,
    verify_claim_B2,
    verify_homogenization_influence,
)
from linfchernoff.distributions import check_invariants, marginals, point_mass
from linfchernoff.errors import GroundSetTooLarge, TooManyTrees
from linfchernoff.graphs import WeightedGraph, leverage_scores


def test_counterexample_small():
    mu = build_counterexample(2, 1)
    assert mu.n == 3 and mu.k == 2
    assert [s for s, _ in mu.support()] == [(0, 1), (1, 2)]


def test_counterexample_4_2():
    mu = build_counterexample(4, 2)
    expected = {(0, 1, 2), (0, 2, 4), (0, 3, 4), (1, 2, 4), (1, 3, 4), (2, 3, 4)}
    assert {s for s, _ in mu.support()} == expected
    np.testing.assert_allclose(mu.probs, 1 / 6)


@pytest.mark.parametrize("n,k", [(1, 1), (3, 2), (5, 3), (7, 1), (8, 4)])
def test_counterexample_shape(n, k):
    mu = build_counterexample(n, k)
    check_invariants(mu)
    assert mu.support_size == comb(n, k) and mu.k == k + 1


def test_counterexample_errors():
    with pytest.raises(ValueError):
        build_counterexample(2, 3)
    with pytest.raises(GroundSetTooLarge):
        build_counterexample(30, 2)


@pytest.mark.parametrize("n,k,bound", [(4, 2, 3.0), (6, 2, 5.0), (3, 3, 1.0)])
def test_one_sided_upper_bound(n, k, bound):
    res = verify_claim_B1(n, k)
    assert res.reference == pytest.approx(bound)
    assert res.ok


@pytest.mark.parametrize("n,k,lower", [(4, 2, 2.0), (9, 3, 4.0), (2, 1, 1.0)])
def test_two_sided_lower_bound(n, k, lower):
    res = verify_claim_B2(n, k)
    assert res.reference == pytest.approx(lower)
    assert res.ok


# values from an independent brute force over every pinning (first entry counts
# the diagonal term 1 - p_i, second drops it)
@pytest.mark.parametrize("n,k,diag,offdiag,two", [
    (2, 1, 1.0, 0.5, 2.0),
    (4, 2, 2.0, 4 / 3, 3.2),
    (6, 2, 2.8, 2.0, 4.142857142857139),
    (9, 3, 22 / 7, 16 / 7, 5.373493975903148),
])
def test_separating_family_pinned_values(n, k, diag, offdiag, two):
    one = verify_claim_B1(n, k)
    assert one.measured == pytest.approx(diag, abs=1e-9)
    assert one.measured_offdiag == pytest.approx(offdiag, abs=1e-9)
    assert verify_claim_B2(n, k).measured == pytest.approx(two, abs=1e-9)


def test_tree_distribution_examples(mu_tri):
    tri = WeightedGraph(3, [(0, 1, 1), (0, 2, 1), (1, 2, 1)])
    mu = tree_distribution(tri)
    assert mu.support() == pytest.approx(mu_tri.support())
    path = WeightedGraph(3, [(0, 1, 1), (1, 2, 1)])
    assert tree_distribution(path).support() == [((0, 1), 1.0)]
    wtri = WeightedGraph(3, [(0, 1, 2), (1, 2, 1), (0, 2, 1)])
    probs = dict(tree_distribution(wtri).support())
    assert probs[(0, 1)] == pytest.approx(0.4)
    assert probs[(0, 2)] == pytest.approx(0.4)
    assert probs[(1, 2)] == pytest.approx(0.2)
    with pytest.raises(TooManyTrees):
        tree_distribution(complete_graph(7), cap=1000)


def test_tree_marginals_are_leverage_scores():
    for g in connected_small_graphs(5):
        np.testing.assert_allclose(marginals(tree_distribution(g)), leverage_scores(g), atol=1e-9)


def test_homogenization_examples(mu_pair):
    rep = verify_homogenization_influence(mu_pair)
    assert rep.two_sided_d == pytest.approx(2.0)
    assert rep.hom_one_sided_d <= 4 + 1e-9 and rep.ok
    rep = verify_homogenization_influence(product_distribution([0.5, 0.5]))
    assert rep.two_sided_d == pytest.approx(1.0)
    assert rep.hom_one_sided_d <= 2 + 1e-9 and rep.ok
    rep = verify_homogenization_influence(point_mass(3, (1,)))
    assert rep.two_sided_d == 0 and rep.hom_one_sided_d == 0 and rep.ok


@pytest.mark.parametrize("seed", range(8))
def test_homogenization_random(seed):
    mu = random_distribution(4, np.random.default_rng(seed))
    rep = verify_homogenization_influence(mu)
    assert rep.ok
    assert reflection_residual(mu) <= 1e-12


def test_uniform_k_subsets():
    mu = uniform_k_subsets(5, 2)
    assert mu.support_size == 10 and mu.k == 2
    np.testing.assert_allclose(marginals(mu), 0.4)
