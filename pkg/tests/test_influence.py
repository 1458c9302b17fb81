import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from linfchernoff.constructions import product_distribution, random_homogeneous, uniform_k_subsets
from linfchernoff.distributions import (
    ConditioningSpec,
    build_distribution,
    condition,
    marginals,
    point_mass,
)
from linfchernoff.errors import GroundSetTooLarge, InfeasibleConditioning, NotHomogeneous
from linfchernoff.influence import (
    ONE_SIDED,
    TWO_SIDED,
    ami_parameter,
    analyze,
    bayes_symmetry_residual,
    linf_parameter,
    one_sided_influence,
    two_sided_influence,
    verify_ii_ami_identity,
)


def test_one_sided_triangle_empty(mu_tri):
    m = one_sided_influence(mu_tri, [])
    assert m.entries[0, 1] == pytest.approx(-1 / 6)
    assert m.entries[0, 0] == pytest.approx(1 / 3)
    assert m.row_sums()[0] == pytest.approx(2 / 3)


def test_one_sided_product_bits():
    m = one_sided_influence(product_distribution([0.5, 0.5]), [])
    np.testing.assert_allclose(m.entries, np.diag([0.5, 0.5]), atol=1e-15)


def test_one_sided_triangle_pinned(mu_tri):
    m = one_sided_influence(mu_tri, [0])
    assert m.entries[1, 2] == pytest.approx(-1 / 2)
    assert m.row_sums()[1] == pytest.approx(1.0)
    assert not m.entries[0].any()  # rows inside Lambda vanish


def test_one_sided_infeasible(mu_pair):
    with pytest.raises(InfeasibleConditioning):
        one_sided_influence(mu_pair, [0, 1])


def test_two_sided_triangle(mu_tri):
    m = two_sided_influence(mu_tri)
    assert m.entries[0, 1] == pytest.approx(-1 / 2)
    assert m.entries[0, 0] == 1.0
    assert m.row_sums()[0] == pytest.approx(2.0)


def test_two_sided_product_bits():
    m = two_sided_influence(product_distribution([0.5, 0.5, 0.5]))
    np.testing.assert_allclose(m.entries, np.eye(3), atol=1e-15)


def test_two_sided_counterexample_row(mu_cex42):
    m = two_sided_influence(mu_cex42)
    assert m.row_sums()[4] >= 2 - 1e-12


def test_linf_triangle(mu_tri):
    one = linf_parameter(mu_tri, ONE_SIDED)
    assert one.d_inf == pytest.approx(1.0)
    assert one.argmax_spec.lam == (0,)
    assert linf_parameter(mu_tri, TWO_SIDED).d_inf <= 2 + 1e-9


def test_linf_counterexample(mu_cex42):
    assert linf_parameter(mu_cex42, ONE_SIDED).d_inf <= 3 + 1e-9


def test_linf_cap():
    mu = uniform_k_subsets(8, 4)
    with pytest.raises(GroundSetTooLarge):
        linf_parameter(mu, TWO_SIDED, max_specs=100)


def test_ami_examples(mu_tri):
    assert ami_parameter(mu_tri) == pytest.approx(1.0)
    assert ami_parameter(uniform_k_subsets(3, 1)) == pytest.approx(4 / 3)
    assert linf_parameter(uniform_k_subsets(3, 1)).d_inf == pytest.approx(4 / 3)
    assert ami_parameter(point_mass(2, (0, 1))) == 0.0
    with pytest.raises(NotHomogeneous):
        ami_parameter(product_distribution([0.5, 0.5]))


def test_identity_examples(mu_tri, mu_cex42):
    chk = verify_ii_ami_identity(mu_tri)
    row = next(r for r in chk.rows if len(r[0]) == 0 and r[1] == 0)
    assert row[2] == pytest.approx(2 / 9) and row[3] == pytest.approx(2 / 9)
    assert chk.max_residual <= 1e-15
    assert verify_ii_ami_identity(mu_cex42).max_residual <= 1e-10
    pm = verify_ii_ami_identity(point_mass(3, (0, 2)))
    assert all(r[2] == 0 and r[3] == 0 for r in pm.rows)


def test_analyze_report(mu_tri):
    res = analyze(mu_tri, record_rows=True)
    assert res.d_inf_one_sided == pytest.approx(1.0)
    assert res.d_am == pytest.approx(1.0)
    assert res.d_inf_two_sided == pytest.approx(2.0)
    assert any(spec.lam == (0,) and row == 1 for spec, row, _ in res.one_sided.per_spec_rows)


# --- brute-force oracle ------------------------------------------------------------


def _brute_one_sided(mu, lam):
    base = condition(mu, ConditioningSpec.ones(lam))
    p = marginals(base)
    M = np.zeros((mu.n, mu.n))
    for i in range(mu.n):
        if i in lam or p[i] == 0:
            continue
        M[i] = marginals(condition(base, ConditioningSpec.ones([i]))) - p
        M[i, i] = 1 - p[i]
    return M


def _brute_two_sided(mu, spec):
    base = condition(mu, spec)
    M = np.zeros((mu.n, mu.n))
    for i in range(mu.n):
        try:
            hi = condition(base, ConditioningSpec(((i, 1),)))
            lo = condition(base, ConditioningSpec(((i, 0),)))
        except (InfeasibleConditioning, ValueError):
            continue
        M[i] = marginals(hi) - marginals(lo)
    return M


@st.composite
def distributions(draw, max_n=5):
    n = draw(st.integers(1, max_n))
    masks = draw(st.lists(st.integers(0, (1 << n) - 1), min_size=1, max_size=10, unique=True))
    weights = draw(st.lists(st.integers(1, 9), min_size=len(masks), max_size=len(masks)))
    return build_distribution(n, list(zip(masks, weights)))


@settings(max_examples=50, deadline=None)
@given(distributions())
def test_kernels_match_bruteforce(mu):
    best = 0.0
    for r in range(mu.n + 1):
        for lam in itertools.combinations(range(mu.n), r):
            try:
                M = one_sided_influence(mu, lam)
            except InfeasibleConditioning:
                continue
            ref = _brute_one_sided(mu, lam)
            np.testing.assert_allclose(M.entries, ref, atol=1e-12)
            assert np.all(np.abs(M.entries) <= 1 + 1e-12)
            best = max(best, M.norm_inf())
    assert linf_parameter(mu, ONE_SIDED).d_inf == pytest.approx(best, abs=1e-12)
    best2 = 0.0
    for r in range(mu.n + 1):
        for lam in itertools.combinations(range(mu.n), r):
            for vals in itertools.product((0, 1), repeat=r):
                spec = ConditioningSpec(tuple(zip(lam, vals)))
                try:
                    M = two_sided_influence(mu, spec)
                except InfeasibleConditioning:
                    continue
                np.testing.assert_allclose(M.entries, _brute_two_sided(mu, spec), atol=1e-12)
                best2 = max(best2, M.norm_inf())
    assert linf_parameter(mu, TWO_SIDED).d_inf == pytest.approx(best2, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(distributions())
def test_conditioned_paths_agree(mu):
    spec = ConditioningSpec(((0, int(mu.masks[0] & 1)),))
    direct = two_sided_influence(mu, spec).entries
    via = two_sided_influence(condition(mu, spec)).entries
    np.testing.assert_allclose(direct, via, atol=1e-12)
    lam = [0] if mu.masks[-1] & 1 else []
    if lam:
        d1 = one_sided_influence(mu, lam).entries
        d2 = one_sided_influence(condition(mu, ConditioningSpec.ones(lam)), []).entries
        np.testing.assert_allclose(d1, d2, atol=1e-12)


@pytest.mark.parametrize("seed", range(10))
def test_identity_random_homogeneous(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 8))
    mu = random_homogeneous(n, int(rng.integers(1, min(4, n) + 1)), rng)
    assert abs(linf_parameter(mu).d_inf - ami_parameter(mu)) <= 1e-9
    assert verify_ii_ami_identity(mu).max_residual <= 1e-9
    assert bayes_symmetry_residual(mu) <= 1e-12
