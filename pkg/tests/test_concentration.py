import math
import warnings

import numpy as np
import pytest

from linfchernoff import concentration as conc
from linfchernoff.constructions import (
    diagonal_ensemble,
    random_ensemble,
    random_homogeneous,
    uniform_k_subsets,
)
from linfchernoff.distributions import build_distribution, point_mass
from linfchernoff.errors import (
    CTooSmall,
    DimensionMismatch,
    InfeasibleConditioning,
    NonPositiveD,
    PreconditionError,
    ThetaOutOfRange,
)
from linfchernoff.influence import ami_parameter, linf_parameter


def pair_ensemble():
    return conc.MatrixEnsemble(np.array([np.diag([1.0, 0.0]), np.diag([0.0, 1.0])]))


def test_ensemble_validation():
    with pytest.raises(ValueError):
        conc.MatrixEnsemble(np.array([[[0.0, 1.0], [0.0, 0.0]]]))
    with pytest.raises(ValueError):
        conc.MatrixEnsemble(np.array([np.diag([-1.0, 0.0])]))
    with pytest.raises(ValueError):
        conc.MatrixEnsemble(np.array([np.diag([2.0, 0.0])]), r_cap=1.0)
    with pytest.raises(DimensionMismatch):
        conc.MatrixEnsemble(np.zeros((2, 2)))


def test_expected_sum_examples(mu_tri):
    np.testing.assert_allclose(conc.expected_sum(mu_tri, diagonal_ensemble(3)), np.eye(3) * 2 / 3)
    zero = conc.MatrixEnsemble(np.zeros((3, 2, 2)))
    assert not conc.expected_sum(mu_tri, zero).any()
    pm = point_mass(2, (0, 1))
    ens = conc.MatrixEnsemble(np.array([np.eye(2), np.eye(2)]))
    np.testing.assert_allclose(conc.expected_sum(pm, ens), 2 * np.eye(2))
    with pytest.raises(DimensionMismatch):
        conc.expected_sum(mu_tri, ens)


def test_expected_spectrum_examples(mu_tri):
    lo, hi = conc.expected_spectrum(mu_tri, diagonal_ensemble(3))
    assert lo == pytest.approx(2 / 3) and hi == pytest.approx(2 / 3)
    assert conc.expected_spectrum(mu_tri, conc.MatrixEnsemble(np.zeros((3, 2, 2)))) == (0.0, 0.0)
    lo, hi = conc.expected_spectrum(point_mass(2, (0, 1)), pair_ensemble())
    assert (lo, hi) == pytest.approx((1.0, 1.0))


def test_z_matrix_examples(mu_tri, mu_pair):
    z = conc.z_matrix(mu_tri, diagonal_ensemble(3), 0).z
    np.testing.assert_allclose(z, np.diag([1 / 3, -1 / 6, -1 / 6]), atol=1e-15)
    pm = point_mass(3, (0, 2))
    for v in (0, 2):
        assert not np.abs(conc.z_matrix(pm, diagonal_ensemble(3), v).z).max() > 1e-15
    with pytest.raises(InfeasibleConditioning):
        conc.z_matrix(pm, diagonal_ensemble(3), 1)
    np.testing.assert_allclose(conc.z_matrix(mu_pair, pair_ensemble(), 0).z, np.diag([0.5, -0.5]))


def test_z_batch_matches_literal(mu_cex42, rng):
    ens = random_ensemble(mu_cex42.n, 3, rng)
    Z, feasible = conc.z_matrices(mu_cex42, ens)
    for v in range(mu_cex42.n):
        assert feasible[v]
        np.testing.assert_allclose(Z[v], conc.z_matrix(mu_cex42, ens, v).z, atol=1e-12)


def test_zv_second_moment_bound(mu_tri, mu_cex42):
    rep = conc.check_claim_bound_zv(mu_tri, diagonal_ensemble(3))
    assert rep.ok
    assert rep.margin_upper == pytest.approx(1 / 3 - 1.0)
    assert conc.check_claim_bound_zv(point_mass(2, (0,)), conc.MatrixEnsemble(np.zeros((2, 1, 1)))).ok
    for seed in range(3):
        ens = random_ensemble(mu_cex42.n, 3, np.random.default_rng(seed))
        assert conc.check_claim_bound_zv(mu_cex42, ens).ok
    with pytest.raises(PreconditionError):
        conc.check_claim_bound_zv(mu_tri, conc.MatrixEnsemble(np.stack([2 * np.eye(1)] * 3), 2.0))


def test_trace_mgf_examples(mu_tri, rng):
    ens = diagonal_ensemble(3)
    H = conc.random_symmetric(rng, 3)
    lhs, rhs = conc.trace_mgf_check(mu_tri, ens, 0.0, H, 5.0)
    assert lhs == pytest.approx(rhs) and lhs == pytest.approx(conc.trace_exp(H))
    pm = point_mass(3, (0, 1))
    lhs, rhs = conc.trace_mgf_check(pm, ens, 0.05, None, 5.0)
    assert lhs <= rhs
    for theta in (0.02, 0.05, 0.1, -0.02, -0.05, -0.1):
        lhs, rhs = conc.trace_mgf_check(mu_tri, ens, theta, None, 5.0, 1.0, 1.0)
        assert lhs <= rhs + 1e-9


def test_trace_mgf_guards(mu_tri):
    with pytest.raises(ThetaOutOfRange):
        conc.trace_mgf_check(mu_tri, diagonal_ensemble(3), 0.2, None, 5.0)
    with pytest.warns(CTooSmall):
        conc.trace_mgf_check(mu_tri, diagonal_ensemble(3), 0.1, None, 1.0, 1.0, 1.0)


def test_second_part_examples(mu_tri, mu_pair):
    assert conc.second_part_check(mu_tri, diagonal_ensemble(3), 0.0, 5.0) == pytest.approx(0.0, abs=1e-15)
    assert conc.second_part_check(mu_tri, diagonal_ensemble(3), 0.1, 5.0) <= 0
    assert conc.second_part_check(mu_pair, pair_ensemble(), -0.1, 5.0) <= 0


def test_mean_z_vanishes(rng):
    for _ in range(5):
        mu = random_homogeneous(6, 3, rng)
        ens = random_ensemble(6, 3, rng)
        assert conc.check_claim_bound_zv(mu, ens).mean_z_residual <= 1e-9


def test_tail_bound_values():
    assert conc.tail_bound(0.0, 5.0, 1.0, 4) == 4.0
    assert conc.tail_bound(1.0, 20.0, 1.0, 1) == pytest.approx(math.exp(-1))
    assert conc.tail_bound(0.5, 80.0, 2.0, 3) == pytest.approx(3 * math.exp(-0.25))
    assert conc.tail_bound(0.5, 80.0, 2.0, 3) == pytest.approx(2.336, abs=5e-4)
    with pytest.raises(NonPositiveD):
        conc.tail_bound(0.5, 1.0, 0.0, 1)


def test_tail_bound_monotone():
    grid = np.linspace(0.05, 1.0, 12)
    vals = [conc.tail_bound(d, 10.0, 1.5, 3) for d in grid]
    assert all(a >= b for a, b in zip(vals, vals[1:]))
    vals = [conc.tail_bound(0.5, m, 1.5, 3) for m in grid * 50]
    assert all(a >= b for a, b in zip(vals, vals[1:]))
    vals = [conc.tail_bound(0.5, 10.0, D, 3) for D in grid * 4]
    assert all(a <= b for a, b in zip(vals, vals[1:]))
    vals = [conc.tail_bound(0.5, 10.0, 1.5, 3, R) for R in grid * 4]
    assert all(a <= b for a, b in zip(vals, vals[1:]))


def test_tail_point_mass():
    pm = point_mass(3, (0, 1))
    r = conc.monte_carlo_tail(pm, diagonal_ensemble(3), 0.5, conc.MAX, 100, D=1.0)
    assert r.empirical == 0.0 and r.ok


def test_tail_triangle(mu_tri):
    r = conc.monte_carlo_tail(mu_tri, diagonal_ensemble(3), 0.6, conc.MAX, 100_000)
    assert r.exact and r.empirical == 0.0 and r.ok
    r5 = conc.monte_carlo_tail(mu_tri, diagonal_ensemble(3), 0.5, conc.MAX, 100_000)
    assert r5.empirical == 1.0  # boundary hit counts


def test_tail_sampled_matches_exact():
    mu = uniform_k_subsets(8, 4)
    ens = conc.MatrixEnsemble(((np.arange(8) < 4).astype(float))[:, None, None])
    exact = conc.monte_carlo_tail(mu, ens, 0.4, conc.MAX, 20_000)
    mc = conc.monte_carlo_tail(mu, ens, 0.4, conc.MAX, 20_000, np.random.default_rng(3),
                               exact_limit=0)
    assert exact.exact and not mc.exact
    assert abs(exact.empirical - mc.empirical) <= 4 * math.sqrt(0.25 / 20_000) + 1e-3
    again = conc.monte_carlo_tail(mu, ens, 0.4, conc.MAX, 20_000, np.random.default_rng(3),
                                  exact_limit=0)
    assert again.empirical == mc.empirical
    assert exact.bound < 1 and exact.ok


def test_tail_nonhomogeneous_uses_centered_form():
    mu = build_distribution(2, [((0,), 1), ((0, 1), 1), ((), 2)])
    r = conc.monte_carlo_tail(mu, diagonal_ensemble(2), 0.5, conc.MIN, 10)
    assert r.centered
    assert r.D == pytest.approx(2 * linf_parameter(mu, "two-sided").d_inf)


def test_matrix_fact_special_cases(rng):
    A = conc.random_symmetric(rng, 4)
    assert conc.fact_square_slack(A, A) == pytest.approx(0.0, abs=1e-12)
    D1, D2 = np.diag(rng.normal(size=4)), np.diag(rng.normal(size=4))
    assert conc.golden_thompson_slack(D1, D2) == pytest.approx(0.0, abs=1e-10)


def test_matrix_facts_random():
    rep = conc.matrix_fact_checks(np.random.default_rng(0), pairs=100, d=4)
    assert rep.ok, rep.worst()


def test_expected_sum_linearity(rng):
    mu1 = random_homogeneous(5, 2, rng)
    mu2 = random_homogeneous(5, 2, rng)
    e1, e2 = random_ensemble(5, 3, rng), random_ensemble(5, 3, rng)
    mixed = conc.MatrixEnsemble((e1.mats + e2.mats) / 2)
    np.testing.assert_allclose(conc.expected_sum(mu1, mixed),
                               (conc.expected_sum(mu1, e1) + conc.expected_sum(mu1, e2)) / 2,
                               atol=1e-10)
    mix = build_distribution(5, [(int(m), 0.3 * p) for m, p in zip(mu1.masks, mu1.probs)]
                             + [(int(m), 0.7 * p) for m, p in zip(mu2.masks, mu2.probs)])
    np.testing.assert_allclose(conc.expected_sum(mix, e1),
                               0.3 * conc.expected_sum(mu1, e1) + 0.7 * conc.expected_sum(mu2, e1),
                               atol=1e-10)


def test_mgf_on_random_homogeneous(rng):
    for _ in range(4):
        mu = random_homogeneous(6, 3, rng)
        ens = random_ensemble(6, 3, rng)
        d_inf, d_am = linf_parameter(mu).d_inf, ami_parameter(mu)
        if d_inf == 0:
            continue
        c = 5 * d_inf * d_am
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            for theta in np.linspace(-1, 1, 9) / (2 * c):
                lhs, rhs = conc.trace_mgf_check(mu, ens, theta, None, c, d_inf, d_am)
                assert lhs <= rhs + 1e-9
