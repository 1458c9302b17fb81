import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog

from linfchernoff.constructions import complete_graph, product_distribution, tree_distribution
from linfchernoff.distributions import build_distribution, point_mass
from linfchernoff.errors import GroundSetTooLarge, NotHomogeneous, PreconditionError
from linfchernoff.graphs import WeightedGraph
from linfchernoff.scp import (
    _flow_float,
    check_scp,
    coupling_exists,
    coupling_exists_hall,
    iter_instances,
    verify_scp_implies_twosided,
)


def test_triangle_is_scp(mu_tri):
    res = check_scp(mu_tri)
    assert res.ok and res.witness is None


def test_product_is_scp():
    assert check_scp(product_distribution([0.5, 0.5, 0.5])).ok


def test_two_blocks_not_scp():
    mu = build_distribution(4, [((0, 1), 1), ((2, 3), 1)])
    res = check_scp(mu)
    assert not res.ok
    assert res.witness == ((), 0)


def test_instance_shape():
    mu = build_distribution(4, [((0, 1), 1), ((2, 3), 1)])
    inst = next(iter_instances(mu))
    assert inst.tau == () and inst.v == 0
    assert inst.left_masks.tolist() == [0b0010]
    assert inst.right_masks.tolist() == [0b1100]
    assert inst.allowed_pairs == []


def test_scp_implies_twosided(mu_tri):
    assert verify_scp_implies_twosided(mu_tri)
    path = WeightedGraph(3, [(0, 1, 1), (1, 2, 1)])
    assert verify_scp_implies_twosided(tree_distribution(path))
    assert verify_scp_implies_twosided(tree_distribution(complete_graph(4)))


def test_scp_preconditions():
    with pytest.raises(NotHomogeneous):
        verify_scp_implies_twosided(product_distribution([0.5, 0.5]))
    with pytest.raises(PreconditionError):
        verify_scp_implies_twosided(build_distribution(4, [((0, 1), 1), ((2, 3), 1)]))
    with pytest.raises(GroundSetTooLarge):
        check_scp(point_mass(5, (0,)), max_n=4)


def _lp_feasible(inst):
    L, R = len(inst.left_mass), len(inst.right_mass)
    pairs = inst.allowed_pairs
    if not pairs:
        return False
    A = np.zeros((L + R, len(pairs)))
    for col, (i, j) in enumerate(pairs):
        A[i, col] = 1
        A[L + j, col] = 1
    b = np.concatenate([inst.left_mass, inst.right_mass])
    res = linprog(np.zeros(len(pairs)), A_eq=A, b_eq=b, bounds=(0, None), method="highs")
    return res.status == 0


@st.composite
def small_distributions(draw):
    n = draw(st.integers(2, 4))
    masks = draw(st.lists(st.integers(0, (1 << n) - 1), min_size=2, max_size=8, unique=True))
    weights = draw(st.lists(st.integers(1, 6), min_size=len(masks), max_size=len(masks)))
    return build_distribution(n, list(zip(masks, weights)))


@settings(max_examples=80, deadline=None)
@given(small_distributions())
def test_flow_agrees_with_hall_and_lp(mu):
    for inst in iter_instances(mu):
        flow = coupling_exists(inst)
        assert flow == coupling_exists_hall(inst)
        assert flow == _lp_feasible(inst)
        if inst.allowed_pairs:
            assert flow == _flow_float(inst)


@settings(max_examples=40, deadline=None)
@given(small_distributions(), st.randoms(use_true_random=False))
def test_relabeling_invariance(mu, rnd):
    perm = list(range(mu.n))
    rnd.shuffle(perm)
    permuted = build_distribution(mu.n, [([perm[i] for i in s], p) for s, p in mu.support()])
    assert check_scp(mu).ok == check_scp(permuted).ok


def test_irrational_masses_use_float_path():
    w = [np.sqrt(2), np.pi, np.e]
    mu = build_distribution(3, [((0, 1), w[0]), ((0, 2), w[1]), ((1, 2), w[2])])
    assert check_scp(mu).ok
