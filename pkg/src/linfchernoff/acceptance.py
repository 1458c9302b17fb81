"""Acceptance suite: nine end-to-end checks, each reported as one pass/fail line."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import concentration as conc
from .concentration import MatrixEnsemble
from .constructions import (
    build_counterexample,
    complete_graph,
    connected_small_graphs,
    diagonal_ensemble,
    erdos_renyi_connected,
    product_distribution,
    random_distribution,
    random_ensemble,
    random_homogeneous,
    tree_distribution,
    uniform_k_subsets,
    verify_claim_B1,
    verify_claim_B2,
    verify_homogenization_influence,
)
from .distributions import ConditioningSpec, Distribution, build_distribution, homogenize, point_mass
from .graphs import TreeSampler, WeightedGraph, laplacian
from .influence import (
    ONE_SIDED,
    TWO_SIDED,
    ami_parameter,
    bayes_symmetry_residual,
    linf_parameter,
    two_sided_influence,
)
from .scp import check_scp
from .sparsifier import (
    edge_ensemble,
    edge_marginal_check,
    expected_tree_laplacian,
    sparsify,
    spectral_check,
)

DEFAULT_SEED = 0
DELTAS = tuple(round(0.1 * i, 1) for i in range(1, 11))


@dataclass
class Criterion:
    number: int
    title: str
    ok: bool
    detail: str
    seconds: float = 0.0
    data: dict = field(default_factory=dict, repr=False)

    def line(self) -> str:
        verdict = "PASS" if self.ok else "FAIL"
        return f"criterion {self.number} [{verdict}] {self.title}: {self.detail} ({self.seconds:.1f}s)"


def _rng(seed: int, salt: int) -> np.random.Generator:
    return np.random.default_rng([seed, salt])


# --- shared fixtures ----------------------------------------------------------------


def mu_tri() -> Distribution:
    return build_distribution(3, [((0, 1), 1), ((0, 2), 1), ((1, 2), 1)])


def mu_pair() -> Distribution:
    return build_distribution(2, [((0,), 1), ((1,), 1)])


def mgf_fixtures(seed: int) -> list[tuple[str, Distribution, list[conc.MatrixEnsemble]]]:
    """(name, distribution, three seeded ensembles) triples, d <= 4."""
    rng = _rng(seed, 3)
    out = []
    for name, mu in (("tri", mu_tri()), ("cex(4,2)", build_counterexample(4, 2)),
                     ("K4-trees", tree_distribution(complete_graph(4)))):
        ens = [random_ensemble(mu.n, int(d), rng) for d in (2, 3, 4)]
        out.append((name, mu, ens))
    return out


# --- criteria -----------------------------------------------------------------------


def criterion_1(seed: int = DEFAULT_SEED, count: int = 200) -> Criterion:
    rng = _rng(seed, 1)
    worst_gap = worst_bayes = 0.0
    for _ in range(count):
        n = int(rng.integers(2, 9))
        k = int(rng.integers(1, min(4, n) + 1))
        mu = random_homogeneous(n, k, rng)
        gap = abs(linf_parameter(mu, ONE_SIDED).d_inf - ami_parameter(mu))
        bayes = bayes_symmetry_residual(mu)
        # one more pinning: the heaviest element set to 1
        top = int(np.argmax(mu.probs @ mu.indicators))
        bayes = max(bayes, bayes_symmetry_residual(mu, ConditioningSpec.ones([top])))
        worst_gap, worst_bayes = max(worst_gap, gap), max(worst_bayes, bayes)
    ok = worst_gap <= 1e-9 and worst_bayes <= 1e-12
    return Criterion(1, "one-sided D_inf equals D_am", ok,
                     f"{count} distributions, max |D_inf - D_am| = {worst_gap:.2e}, "
                     f"max Bayes residual = {worst_bayes:.2e}")


def criterion_2(seed: int = DEFAULT_SEED) -> Criterion:
    rng = _rng(seed, 2)
    fixtures = [tree_distribution(g) for g in connected_small_graphs(5)]
    for n in range(1, 7):
        fixtures.append(product_distribution(np.full(n, 0.5)))
        fixtures.append(product_distribution(rng.uniform(0.05, 0.95, n)))
        p = rng.uniform(0.05, 0.95, n)
        p[rng.integers(n)] = float(rng.integers(2))  # one deterministic bit
        fixtures.append(product_distribution(p))
    scp_count = 0
    worst = 0.0
    bad = []
    for mu in fixtures:
        if check_scp(mu).ok:
            scp_count += 1
            d = linf_parameter(mu, TWO_SIDED).d_inf
            worst = max(worst, d)
            if d > 2 + 1e-9:
                bad.append(repr(mu))
    ok = not bad
    return Criterion(2, "SCP implies two-sided parameter <= 2", ok,
                     f"{scp_count}/{len(fixtures)} fixtures SCP, max two-sided D = {worst:.6g}"
                     + (f"; violations: {bad}" if bad else ""))


def _theta_grid(c: float) -> np.ndarray:
    return np.linspace(-1.0, 1.0, 9) / (2 * c)


def criterion_3(seed: int = DEFAULT_SEED) -> Criterion:
    rng = _rng(seed, 33)
    worst_trace = worst_second = -math.inf
    # theta = 0 is an equality; track the strict grid points separately
    strict_trace = strict_second = -math.inf
    evaluations = 0
    for _name, mu, ensembles in mgf_fixtures(seed):
        d_inf = linf_parameter(mu, ONE_SIDED).d_inf
        d_am = ami_parameter(mu)
        c = 5 * d_inf * d_am
        for ens in ensembles:
            Hs = [np.zeros((ens.d, ens.d))] + [conc.random_symmetric(rng, ens.d) for _ in range(2)]
            for theta in _theta_grid(c):
                for H in Hs:
                    lhs, rhs = conc.trace_mgf_check(mu, ens, theta, H, c, d_inf, d_am)
                    gap = (lhs - rhs) / max(1.0, abs(rhs))
                    worst_trace = max(worst_trace, gap)
                    if theta != 0:
                        strict_trace = max(strict_trace, gap)
                    evaluations += 1
                sp = conc.second_part_check(mu, ens, theta, c, d_inf, d_am)
                worst_second = max(worst_second, sp)
                if theta != 0:
                    strict_second = max(strict_second, sp)
    ok = worst_trace <= 1e-9 and worst_second <= 1e-9
    return Criterion(3, "trace MGF step and averaged exponential bound", ok,
                     f"{evaluations} trace comparisons, max (lhs-rhs)/max(1,rhs) = {worst_trace:.3e} "
                     f"({strict_trace:.3e} for theta != 0), max lambda_max - 1 = {worst_second:.3e} "
                     f"({strict_second:.3e} for theta != 0)")


def criterion_4(seed: int = DEFAULT_SEED) -> Criterion:
    worst_upper = -math.inf
    worst_var = math.inf
    for _name, mu, ensembles in mgf_fixtures(seed):
        d_inf = linf_parameter(mu, ONE_SIDED).d_inf
        d_am = ami_parameter(mu)
        for ens in ensembles:
            rep = conc.check_claim_bound_zv(mu, ens, d_inf, d_am)
            worst_upper = max(worst_upper, rep.margin_upper)
            worst_var = min(worst_var, rep.margin_variance)
    ok = worst_upper <= 1e-9 and worst_var >= -1e-9
    return Criterion(4, "Z_v upper and variance bounds", ok,
                     f"max lambda_max(Z_v - D I) = {worst_upper:.3e}, "
                     f"min lambda_min(variance gap) = {worst_var:.3e}")


def _tail_sweep(source, ens, D=None, centered=None, trials=10_000, rng=None):
    results = []
    for side in (conc.MAX, conc.MIN):
        for delta in DELTAS:
            results.append(conc.monte_carlo_tail(source, ens, delta, side, trials, rng,
                                                 D=D, centered=centered))
    return results


def criterion_5(seed: int = DEFAULT_SEED, mc_trials: int = 10_000) -> Criterion:
    rng = _rng(seed, 5)
    results = []
    results += _tail_sweep(mu_tri(), diagonal_ensemble(3))
    for _name, mu, ensembles in mgf_fixtures(seed):
        for ens in ensembles:
            results += _tail_sweep(mu, ens)
    k4 = complete_graph(4)
    results += _tail_sweep(tree_distribution(k4), edge_ensemble(k4))
    for _ in range(5):
        mu = random_homogeneous(int(rng.integers(3, 8)), 2, rng)
        results += _tail_sweep(mu, random_ensemble(mu.n, 3, rng))
    # scalar hypergeometric counts (d = 1), where the bound drops below 1
    for n, k in ((10, 5), (12, 6), (12, 9)):
        half = (np.arange(n) < n // 2).astype(float)
        results += _tail_sweep(uniform_k_subsets(n, k), MatrixEnsemble(half[:, None, None]))
    exact = [r for r in results if r.exact]
    # K_8 trees: spanning-tree laws are SCP, so D = 2 bounds the one-sided parameter
    k8 = complete_graph(8)
    mc = _tail_sweep(TreeSampler(k8), edge_ensemble(k8), D=2.0, centered=False,
                     trials=mc_trials, rng=rng)
    failures = [r for r in exact + mc if not r.ok]
    worst_exact = max(r.empirical - r.bound for r in exact)
    worst_mc = max(r.empirical - r.bound - r.slack for r in mc)
    informative = sum(r.bound < 1 for r in exact + mc)
    detail = (f"{len(exact)} exact tails (max empirical - bound = {worst_exact:.3g}), "
              f"{len(mc)} K_8 Monte Carlo tails (max excess over bound+3sigma = {worst_mc:.3g}), "
              f"{informative} of {len(exact) + len(mc)} bounds below 1")
    if failures:
        f = failures[0]
        detail += f"; first failure delta={f.delta} side={f.side} {f.empirical:.4g} > {f.bound:.4g}"
    return Criterion(5, "matrix Chernoff tails", not failures, detail)


def criterion_6() -> Criterion:
    pairs = [(2, 1), (4, 2), (6, 2), (9, 3)]
    lines = []
    ok = True
    for n, k in pairs:
        b1, b2 = verify_claim_B1(n, k), verify_claim_B2(n, k)
        ok &= b1.ok and b2.ok
        lines.append(f"({n},{k}) one-sided {b1.measured:.6g} <= {b1.reference:.6g}, "
                     f"two-sided {b2.measured:.6g} >= {b2.reference:.6g}")
    for k in (2, 3):
        mu = build_counterexample(k * k, k)
        one = linf_parameter(mu, ONE_SIDED)
        two = two_sided_influence(mu).norm_inf()
        sep_ok = one.d_inf <= 3 + 1e-9 and two >= 2 * (k - 1) - 1e-9
        ok &= sep_ok
        lines.append(f"n=k^2={k * k}: one-sided {one.d_inf:.6g} <= 3 "
                     f"[{'ok' if one.d_inf <= 3 + 1e-9 else 'VIOLATED'}; "
                     f"without diagonal {one.d_inf_offdiag:.6g}], two-sided {two:.6g} >= {2 * (k - 1)}")
    return Criterion(6, "separating family", ok, "; ".join(lines))


def criterion_7(seed: int = DEFAULT_SEED, reps: int = 100, samples: int = 100_000,
                jobs: int = 1) -> Criterion:
    rng = _rng(seed, 7)
    graphs = {"K8": complete_graph(8), "G(12,0.5)": erdos_renyi_connected(12, 0.5, rng)}
    parts = []
    ok = True
    for name, g in graphs.items():
        passes = 0
        t = 0
        for r in range(reps):
            sp = sparsify(g, 0.5, 4.0, _rng(seed, 700 + r), jobs=jobs)
            t = sp.t
            passes += spectral_check(g, sp.laplacian, 0.5).ok
        dev = edge_marginal_check(g, samples, _rng(seed, 71), jobs=jobs)
        ok &= passes >= 95 and dev <= 0.01
        parts.append(f"{name}: t={t}, {passes}/{reps} spectral passes, edge-marginal deviation {dev:.4f}")
    worst = 0.0
    small = connected_small_graphs(5) + [complete_graph(6)]
    wrng = _rng(seed, 72)
    for _ in range(5):
        h = erdos_renyi_connected(6, 0.6, wrng)
        small.append(WeightedGraph(6, [(u, v, float(wrng.uniform(0.5, 3))) for u, v, _w in h.edges]))
    for g in small:
        worst = max(worst, float(np.abs(expected_tree_laplacian(g) - laplacian(g)).max()))
    ok &= worst <= 1e-9
    parts.append(f"exact tree average vs L_G on {len(small)} graphs: max error {worst:.2e}")
    return Criterion(7, "spanning-tree sparsifier", ok, "; ".join(parts))


def homogenization_corpus(seed: int) -> list[Distribution]:
    rng = _rng(seed, 8)
    corpus = [mu_pair(), mu_tri(), product_distribution([0.5, 0.5]), point_mass(3, (0, 2)),
              build_counterexample(2, 1), build_counterexample(4, 2)]
    for n in range(1, 6):
        corpus.append(product_distribution(rng.uniform(0.05, 0.95, n)))
        corpus.append(random_distribution(n, rng))
        corpus.append(random_distribution(n, rng, density=0.3))
    return corpus


def criterion_8(seed: int = DEFAULT_SEED) -> Criterion:
    rng = _rng(seed, 88)
    corpus = homogenization_corpus(seed)
    worst_ratio = 0.0
    worst_refl = 0.0
    bad = 0
    for mu in corpus:
        rep = verify_homogenization_influence(mu)
        bad += not rep.ok
        worst_refl = max(worst_refl, rep.reflection_residual)
        if rep.two_sided_d > 0:
            worst_ratio = max(worst_ratio, rep.hom_one_sided_d / rep.two_sided_d)
    tails = []
    for mu in corpus:
        if mu.homogeneous:
            continue
        two = linf_parameter(mu, TWO_SIDED).d_inf
        ens = random_ensemble(mu.n, 3, rng).padded(mu.n)
        tails += _tail_sweep(homogenize(mu), ens, D=2 * two, centered=True)
    tail_fail = [r for r in tails if not r.ok]
    ok = bad == 0 and not tail_fail
    return Criterion(8, "homogenization", ok,
                     f"{len(corpus)} distributions, {bad} failures, max reflection residual "
                     f"{worst_refl:.1e}, max hom/two-sided ratio {worst_ratio:.4g}; "
                     f"{len(tails)} centered tails, {len(tail_fail)} above bound")


def criterion_9(seed: int = DEFAULT_SEED) -> Criterion:
    rep = conc.matrix_fact_checks(_rng(seed, 9), pairs=100, d=4)
    worst = rep.worst()
    return Criterion(9, "matrix inequalities", rep.ok,
                     ", ".join(f"{k} min slack {v:.3e}" for k, v in worst.items()))


CRITERIA: dict[int, Callable[..., Criterion]] = {
    1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5,
    6: criterion_6, 7: criterion_7, 8: criterion_8, 9: criterion_9,
}


def run_criterion(number: int, seed: int = DEFAULT_SEED, jobs: int = 1) -> Criterion:
    fn = CRITERIA[number]
    start = time.perf_counter()
    if number == 6:
        res = fn()
    elif number == 7:
        res = fn(seed, jobs=jobs)
    else:
        res = fn(seed)
    res.seconds = time.perf_counter() - start
    return res


def run_all(seed: int = DEFAULT_SEED, jobs: int = 1, only=None, echo=print) -> list[Criterion]:
    out = []
    for number in sorted(CRITERIA):
        if only and number not in only:
            continue
        res = run_criterion(number, seed, jobs)
        if echo:
            echo(res.line())
        out.append(res)
    return out
