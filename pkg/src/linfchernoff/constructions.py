"""Fixture generators and the checks built on them."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .concentration import MatrixEnsemble
from .distributions import (
    DEFAULT_MAX_N,
    ConditioningSpec,
    Distribution,
    build_distribution,
    homogenize,
)
from .errors import GroundSetTooLarge
from .graphs import DEFAULT_TREE_CAP, WeightedGraph, enumerate_spanning_trees
from .influence import (
    ONE_SIDED,
    TWO_SIDED,
    feasible_one_sided_sets,
    linf_parameter,
    one_sided_influence,
    two_sided_influence,
)
from .sparsifier import tree_probabilities

CLAIM_TOL = 1e-9
REFLECTION_TOL = 1e-12


# --- the separating family ------------------------------------------------------


def build_counterexample(n: int, k: int, max_n: int = DEFAULT_MAX_N) -> Distribution:
    """Uniform law on ``[n+1]`` with one outcome per k-subset ``S`` of ``[n]``.

    ``S`` becomes ``S + {n}`` (0-based), except ``S = {0..k-1}`` which becomes
    ``S + {k}``.  The result is (k+1)-homogeneous with ``C(n, k)`` outcomes.
    """
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got n={n}, k={k}")
    if n + 1 > max_n:
        raise GroundSetTooLarge(f"n+1={n + 1} exceeds the ground-set cap {max_n}")
    first = tuple(range(k))
    entries = []
    for S in itertools.combinations(range(n), k):
        extra = k if S == first else n
        entries.append((S + (extra,), 1.0))
    return build_distribution(n + 1, entries, max_n=max_n)


def claim_b1_bound(n: int, k: int) -> float:
    return 2 * (n - k) / k + 1


def claim_b2_lower(n: int, k: int) -> float:
    return 2 * k * (n - k) / n


@dataclass
class ClaimCheck:
    n: int
    k: int
    reference: float  # upper bound for the one-sided check, lower bound for the two-sided one
    measured: float
    ok: bool
    measured_offdiag: float | None = None


def verify_claim_B1(n: int, k: int) -> ClaimCheck:
    """One-sided parameter of the separating family against ``2(n-k)/k + 1``."""
    rep = linf_parameter(build_counterexample(n, k), ONE_SIDED)
    bound = claim_b1_bound(n, k)
    return ClaimCheck(n, k, bound, rep.d_inf, rep.d_inf <= bound + CLAIM_TOL, rep.d_inf_offdiag)


def verify_claim_B2(n: int, k: int) -> ClaimCheck:
    """Two-sided row norm with nothing pinned against ``2k(n-k)/n``."""
    m = two_sided_influence(build_counterexample(n, k))
    lower = claim_b2_lower(n, k)
    measured = m.norm_inf()
    return ClaimCheck(n, k, lower, measured, measured >= lower - CLAIM_TOL, m.norm_inf(False))


# --- spanning-tree laws -----------------------------------------------------------


def tree_distribution(g: WeightedGraph, cap: int = DEFAULT_TREE_CAP) -> Distribution:
    """Edge-indicator law of a w-uniform spanning tree, one coordinate per edge."""
    trees = enumerate_spanning_trees(g, cap)
    probs = tree_probabilities(g, trees)
    return build_distribution(g.m, zip(trees, probs), max_n=max(g.m, DEFAULT_MAX_N))


def complete_graph(n: int, weight: float = 1.0) -> WeightedGraph:
    return WeightedGraph(n, [(u, v, weight) for u, v in itertools.combinations(range(n), 2)])


def connected_small_graphs(max_vertices: int = 5) -> list[WeightedGraph]:
    """Every connected simple graph on 2..max_vertices vertices, up to isomorphism."""
    import networkx as nx

    if max_vertices > 7:
        raise ValueError("the graph atlas covers at most 7 vertices")
    out = []
    for h in nx.graph_atlas_g():
        if 2 <= h.number_of_nodes() <= max_vertices and nx.is_connected(h):
            out.append(WeightedGraph(h.number_of_nodes(), [(u, v, 1.0) for u, v in h.edges()]))
    return out


def erdos_renyi_connected(n: int, p: float, rng: np.random.Generator,
                          max_tries: int = 1000) -> WeightedGraph:
    """First connected draw of G(n, p) from ``rng``."""
    pairs = list(itertools.combinations(range(n), 2))
    for _ in range(max_tries):
        keep = rng.random(len(pairs)) < p
        edges = [(u, v, 1.0) for (u, v), k in zip(pairs, keep) if k]
        g = WeightedGraph(n, edges, require_connected=False)
        if g.connected:
            return g
    raise RuntimeError(f"no connected G({n}, {p}) draw in {max_tries} tries")


# --- other families ---------------------------------------------------------------


def product_distribution(p) -> Distribution:
    """Independent bits with ``P[xi_i = 1] = p[i]``."""
    p = np.asarray(p, dtype=float)
    n = len(p)
    if ((p < 0) | (p > 1)).any():
        raise ValueError("bit probabilities must lie in [0, 1]")
    masks = np.arange(1 << n, dtype=np.int64)
    bits = (masks[:, None] >> np.arange(n)) & 1
    w = np.prod(np.where(bits == 1, p, 1 - p), axis=1)
    return build_distribution(n, zip(masks.tolist(), w.tolist()))


def uniform_k_subsets(n: int, k: int) -> Distribution:
    return build_distribution(n, [(S, 1.0) for S in itertools.combinations(range(n), k)])


def random_homogeneous(n: int, k: int, rng: np.random.Generator,
                       density: float = 0.6) -> Distribution:
    """Random weights on a random nonempty family of k-subsets of ``[n]``."""
    subsets = list(itertools.combinations(range(n), k))
    keep = rng.random(len(subsets)) < density
    if not keep.any():
        keep[rng.integers(len(subsets))] = True
    w = rng.exponential(size=len(subsets))
    return build_distribution(n, [(S, x) for S, x, on in zip(subsets, w, keep) if on])


def random_distribution(n: int, rng: np.random.Generator, density: float = 0.5) -> Distribution:
    """Random weights on a random nonempty family of subsets of ``[n]``."""
    total = 1 << n
    keep = rng.random(total) < density
    if not keep.any():
        keep[rng.integers(total)] = True
    w = rng.exponential(size=total)
    return build_distribution(n, [(m, x) for m, (x, on) in enumerate(zip(w, keep)) if on])


def random_ensemble(n: int, d: int, rng: np.random.Generator) -> MatrixEnsemble:
    """PSD matrices with ``lambda_max`` spread over (0, 1]; some are rank one."""
    mats = np.empty((n, d, d))
    for i in range(n):
        rank = 1 if rng.random() < 0.3 else d
        G = rng.standard_normal((d, rank))
        M = G @ G.T
        M *= rng.uniform(0.2, 1.0) / np.linalg.eigvalsh(M)[-1]
        mats[i] = (M + M.T) / 2
    return MatrixEnsemble(mats, 1.0)


def diagonal_ensemble(n: int) -> MatrixEnsemble:
    """``Y_i = e_i e_i^T`` in dimension ``n``."""
    return MatrixEnsemble(np.stack([np.diag(row) for row in np.eye(n)]), 1.0)


# --- homogenization ---------------------------------------------------------------


@dataclass
class HomogenizationCheck:
    two_sided_d: float
    hom_one_sided_d: float
    reflection_residual: float
    ok: bool


def reflection_residual(mu: Distribution) -> float:
    """Largest ``|I(i, j) + I(i, j + n)|`` in the homogenized law over all one-sided pinnings."""
    hom = homogenize(mu)
    n = mu.n
    worst = 0.0
    for lam in feasible_one_sided_sets(hom):
        M = one_sided_influence(hom, ConditioningSpec.from_masks(lam, lam)).entries
        worst = max(worst, float(np.abs(M[:, :n] + M[:, n:]).max(initial=0.0)))
    return worst


def verify_homogenization_influence(mu: Distribution) -> HomogenizationCheck:
    """Compare the homogenized one-sided parameter with twice the two-sided one."""
    two = linf_parameter(mu, TWO_SIDED).d_inf
    hom_one = linf_parameter(homogenize(mu), ONE_SIDED).d_inf
    res = reflection_residual(mu)
    ok = hom_one <= 2 * two + CLAIM_TOL and res <= REFLECTION_TOL
    return HomogenizationCheck(two, hom_one, res, ok)
