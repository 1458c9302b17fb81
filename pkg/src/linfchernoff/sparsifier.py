"""Spectral sparsification by averaging reweighted random spanning trees."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .concentration import MatrixEnsemble
from .errors import KernelMismatch
from .graphs import (
    LaplacianView,
    TreeSampler,
    WeightedGraph,
    enumerate_spanning_trees,
    laplacian_from_weights,
    leverage_scores,
)

KERNEL_TOL = 1e-8
# restricted eigenvalues of L_G against itself are 1 only up to rounding
SPECTRAL_SLACK = 1e-9
# trees per work unit; fixed so the worker count never changes the output
CHUNK = 16


def _chunk_seeds(rng: np.random.Generator, total: int) -> list[tuple[int, np.random.SeedSequence]]:
    root = np.random.SeedSequence(int(rng.integers(0, 2**63)))
    sizes = [min(CHUNK, total - s) for s in range(0, total, CHUNK)]
    return list(zip(sizes, root.spawn(len(sizes))))


def _tree_weight_sum(args) -> np.ndarray:
    """Summed edge weights of ``size`` reweighted trees drawn from one seed."""
    g, lev, size, seed = args
    sampler = TreeSampler(g, lev)
    rng = np.random.default_rng(seed)
    acc = np.zeros(g.m)
    scale = g.weights / lev
    for _ in range(size):
        idx = list(sampler.sample_edges(rng))
        acc[idx] += scale[idx]
    return acc


def _edge_counts(args) -> np.ndarray:
    g, lev, size, seed = args
    sampler = TreeSampler(g, lev)
    rng = np.random.default_rng(seed)
    acc = np.zeros(g.m)
    for _ in range(size):
        acc[list(sampler.sample_edges(rng))] += 1
    return acc


def _run_chunks(fn, g, lev, chunks, jobs: int) -> np.ndarray:
    work = [(g, lev, size, seed) for size, seed in chunks]
    if jobs <= 1 or len(work) <= 1:
        parts = [fn(w) for w in work]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            parts = list(ex.map(fn, work))
    # summed in chunk order, independent of scheduling
    total = np.zeros(g.m)
    for p in parts:
        total += p
    return total


def tree_count(n: int, epsilon: float, constant: float) -> int:
    """``t = ceil(C * eps^-2 * ln n)``, at least 1."""
    return max(1, math.ceil(constant * math.log(n) / epsilon**2))


def _check_epsilon(epsilon: float):
    if not 0 < epsilon <= 1:
        raise ValueError(f"epsilon must lie in (0, 1], got {epsilon}")


@dataclass
class Sparsifier:
    laplacian: np.ndarray
    edge_weights: np.ndarray  # averaged weight per edge of g (zero if never sampled)
    t: int
    epsilon: float
    constant: float


def sparsify(g: WeightedGraph, epsilon: float, constant: float = 4.0,
             rng: np.random.Generator | None = None, jobs: int = 1,
             leverage: np.ndarray | None = None) -> Sparsifier:
    """Average of ``t`` independent trees, each edge reweighted by ``w(e) / l_e``."""
    _check_epsilon(epsilon)
    if constant <= 0:
        raise ValueError("constant must be positive")
    rng = np.random.default_rng() if rng is None else rng
    lev = leverage_scores(g) if leverage is None else leverage
    t = tree_count(g.n, epsilon, constant)
    weights = _run_chunks(_tree_weight_sum, g, lev, _chunk_seeds(rng, t), jobs) / t
    return Sparsifier(laplacian_from_weights(g, weights), weights, t, epsilon, constant)


@dataclass
class SpectralCheck:
    ok: bool
    worst_error: float
    eig_min: float
    eig_max: float


def spectral_check(g: WeightedGraph, approx: np.ndarray, epsilon: float,
                   view: LaplacianView | None = None) -> SpectralCheck:
    """Is ``(1-eps) L_G <= approx <= (1+eps) L_G`` off the all-ones direction?"""
    approx = np.asarray(approx, dtype=float)
    if approx.shape != (g.n, g.n):
        raise ValueError(f"approx has shape {approx.shape}, expected {(g.n, g.n)}")
    if np.abs(approx - approx.T).max() > KERNEL_TOL:
        raise ValueError("approx must be symmetric")
    scale = max(1.0, float(np.abs(approx).max()))
    if np.abs(approx @ np.ones(g.n)).max() > KERNEL_TOL * scale:
        raise KernelMismatch("approx does not annihilate the all-ones vector")
    if epsilon < 0:
        raise ValueError("epsilon must be non-negative")
    view = view or LaplacianView(g)
    Q = view.basis
    M = Q.T @ view.pinv_sqrt @ approx @ view.pinv_sqrt @ Q
    eig = np.linalg.eigvalsh((M + M.T) / 2)
    worst = float(np.abs(eig - 1.0).max()) if eig.size else 0.0
    return SpectralCheck(worst <= epsilon + SPECTRAL_SLACK, worst,
                         float(eig.min(initial=1.0)), float(eig.max(initial=1.0)))


def edge_marginal_check(g: WeightedGraph, trials: int, rng: np.random.Generator,
                        jobs: int = 1) -> float:
    """``max_e |freq(e in T) - l_e|`` over ``trials`` sampled trees."""
    lev = leverage_scores(g)
    counts = _run_chunks(_edge_counts, g, lev, _chunk_seeds(rng, trials), jobs)
    return float(np.abs(counts / trials - lev).max())


def tree_probabilities(g: WeightedGraph, trees: list[tuple[int, ...]]) -> np.ndarray:
    """Exact w-uniform probabilities of the listed (complete) set of trees."""
    logs = np.array([np.log(g.weights[list(t)]).sum() for t in trees])
    p = np.exp(logs - logs.max())
    return p / p.sum()


def expected_tree_laplacian(g: WeightedGraph, cap: int = 10_000) -> np.ndarray:
    """Exact expectation of the reweighted tree Laplacian over all spanning trees."""
    trees = enumerate_spanning_trees(g, cap)
    probs = tree_probabilities(g, trees)
    scale = g.weights / leverage_scores(g)
    w = np.zeros(g.m)
    for t, p in zip(trees, probs):
        idx = list(t)
        w[idx] += p * scale[idx]
    return laplacian_from_weights(g, w)


def edge_ensemble(g: WeightedGraph, view: LaplacianView | None = None) -> MatrixEnsemble:
    """Matrices ``Y_e = (w_e / l_e) Q^T L^+/2 b_e b_e^T L^+/2 Q`` in dimension n - 1.

    Each ``Y_e`` has unit norm and their leverage-weighted sum is the identity,
    so a w-uniform tree gives ``E[sum Y_e] = I``.
    """
    view = view or LaplacianView(g)
    lev = leverage_scores(g, view)
    V = g.incidence() @ view.pinv_sqrt @ view.basis  # (m, n-1)
    mats = (g.weights / lev)[:, None, None] * np.einsum("ei,ej->eij", V, V)
    return MatrixEnsemble((mats + mats.transpose(0, 2, 1)) / 2, 1.0)
