"""Weighted graphs, Laplacians, effective resistances and spanning trees."""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.linalg import null_space
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .errors import Disconnected, TooManyTrees

DENSE_MAX_N = 2000
DEFAULT_TREE_CAP = 10_000


class WeightedGraph:
    """Undirected graph on ``range(n)`` with positive edge weights.

    Edge ``e = (u, v, w)`` keeps its given orientation for the incidence
    vector ``b_e = e_u - e_v``.  Parallel edges are allowed.
    """

    def __init__(self, n: int, edges, require_connected: bool = True):
        self.n = int(n)
        edges = [(int(u), int(v), float(w)) for u, v, w in edges]
        for u, v, w in edges:
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ValueError(f"edge ({u}, {v}) outside vertex range {self.n}")
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            if not w > 0 or not np.isfinite(w):
                raise ValueError(f"edge ({u}, {v}) has non-positive weight {w}")
        self.edges = tuple(edges)
        self.tails = np.array([e[0] for e in edges], dtype=np.int64)
        self.heads = np.array([e[1] for e in edges], dtype=np.int64)
        self.weights = np.array([e[2] for e in edges], dtype=float)
        if require_connected and not self.connected:
            raise Disconnected("graph is not connected")

    @property
    def m(self) -> int:
        return len(self.edges)

    @cached_property
    def connected(self) -> bool:
        if self.n <= 1:
            return True
        adj = coo_matrix((np.ones(self.m), (self.tails, self.heads)), shape=(self.n, self.n))
        return connected_components(adj, directed=False)[0] == 1

    def incidence(self) -> np.ndarray:
        """(m, n) matrix whose rows are the vectors ``b_e``."""
        B = np.zeros((self.m, self.n))
        B[np.arange(self.m), self.tails] = 1.0
        B[np.arange(self.m), self.heads] = -1.0
        return B

    def __repr__(self) -> str:
        return f"WeightedGraph(n={self.n}, m={self.m})"


def laplacian_from_weights(g: WeightedGraph, weights: np.ndarray) -> np.ndarray:
    """``sum_e weights[e] b_e b_e^T`` for the edges of ``g``."""
    L = np.zeros((g.n, g.n))
    np.add.at(L, (g.tails, g.tails), weights)
    np.add.at(L, (g.heads, g.heads), weights)
    np.add.at(L, (g.tails, g.heads), -weights)
    np.add.at(L, (g.heads, g.tails), -weights)
    return L


def laplacian(g: WeightedGraph) -> np.ndarray:
    return laplacian_from_weights(g, g.weights)


class LaplacianView:
    """Dense Laplacian with its pseudo-inverse and pseudo-inverse square root.

    The all-ones kernel is deflated analytically: ``L + 11^T/n`` is invertible
    for a connected graph and shares every other eigenpair with ``L``.
    """

    def __init__(self, g: WeightedGraph):
        if g.n > DENSE_MAX_N:
            raise ValueError(f"dense mode supports n <= {DENSE_MAX_N}")
        if not g.connected:
            raise Disconnected("graph is not connected")
        self.graph = g
        n = g.n
        self.L = laplacian(g)
        J = np.full((n, n), 1.0 / n)
        w, V = np.linalg.eigh(self.L + J)
        if w[0] <= 1e-12 * max(1.0, w[-1]):
            raise Disconnected("Laplacian has a kernel larger than the constants")
        self.pinv = (V / w) @ V.T - J
        self.pinv_sqrt = (V / np.sqrt(w)) @ V.T - J
        # orthonormal basis of the complement of the all-ones vector
        self.basis = null_space(np.ones((1, n))) if n > 1 else np.zeros((1, 0))

    @property
    def n(self) -> int:
        return self.graph.n


def effective_resistance(g: WeightedGraph, u: int, v: int, view: LaplacianView | None = None) -> float:
    if u == v:
        raise ValueError("effective resistance needs two distinct vertices")
    view = view or LaplacianView(g)
    b = np.zeros(g.n)
    b[u], b[v] = 1.0, -1.0
    return float(b @ view.pinv @ b)


def leverage_scores(g: WeightedGraph, view: LaplacianView | None = None) -> np.ndarray:
    """``l_e = w_e * R_eff(e)`` for every edge."""
    view = view or LaplacianView(g)
    B = g.incidence()
    reff = np.einsum("ei,ij,ej->e", B, view.pinv, B)
    return g.weights * reff


# --- spanning trees -----------------------------------------------------------


@dataclass
class TreeSample:
    edges: tuple[int, ...]  # sorted edge indices
    reweights: np.ndarray  # w(e) / l_e for each listed edge


class TreeSampler:
    """Exact w-uniform spanning trees via Wilson's loop-erased random walks.

    The walk leaves a vertex along an incident edge with probability
    proportional to its weight; the tree is grown from root 0.
    """

    def __init__(self, g: WeightedGraph, leverage: np.ndarray | None = None):
        if not g.connected:
            raise Disconnected("graph is not connected")
        self.graph = g
        self._leverage = leverage
        n = g.n
        self._nbr: list[list[int]] = [[] for _ in range(n)]
        self._eid: list[list[int]] = [[] for _ in range(n)]
        self._cum: list[list[float]] = [[] for _ in range(n)]
        for e, (u, v, w) in enumerate(g.edges):
            for a, b in ((u, v), (v, u)):
                self._nbr[a].append(b)
                self._eid[a].append(e)
                prev = self._cum[a][-1] if self._cum[a] else 0.0
                self._cum[a].append(prev + w)

    @property
    def leverage(self) -> np.ndarray:
        if self._leverage is None:
            self._leverage = leverage_scores(self.graph)
        return self._leverage

    def sample_edges(self, rng: np.random.Generator) -> tuple[int, ...]:
        n = self.graph.n
        nbr, eid, cum = self._nbr, self._eid, self._cum
        in_tree = [False] * n
        in_tree[0] = True
        nxt = [-1] * n
        nxt_v = [-1] * n
        buf = rng.random(256).tolist()
        pos = 0
        for start in range(1, n):
            u = start
            while not in_tree[u]:
                if pos == len(buf):
                    buf = rng.random(256).tolist()
                    pos = 0
                c = cum[u]
                k = bisect.bisect_right(c, buf[pos] * c[-1])
                pos += 1
                if k == len(c):
                    k -= 1
                nxt[u] = eid[u][k]
                nxt_v[u] = nbr[u][k]
                u = nxt_v[u]
            u = start
            while not in_tree[u]:
                in_tree[u] = True
                u = nxt_v[u]
        return tuple(sorted(nxt[1:]))

    def sample(self, rng: np.random.Generator) -> TreeSample:
        edges = self.sample_edges(rng)
        idx = np.array(edges, dtype=np.int64)
        return TreeSample(edges, self.graph.weights[idx] / self.leverage[idx])

    # IndicatorSource protocol, used by the tail harness
    def sample_indicators(self, rng: np.random.Generator, size: int) -> np.ndarray:
        x = np.zeros((size, self.graph.m))
        for r in range(size):
            x[r, list(self.sample_edges(rng))] = 1.0
        return x

    def marginals(self) -> np.ndarray:
        return self.leverage


def sample_tree(g: WeightedGraph, rng: np.random.Generator) -> TreeSample:
    return TreeSampler(g).sample(rng)


def count_spanning_trees(g: WeightedGraph) -> int:
    """Kirchhoff count of spanning trees, ignoring weights."""
    if g.n <= 1:
        return 1
    unit = laplacian_from_weights(g, np.ones(g.m))
    sign, logdet = np.linalg.slogdet(unit[1:, 1:])
    return int(round(np.exp(logdet))) if sign > 0 else 0


def enumerate_spanning_trees(g: WeightedGraph, cap: int = DEFAULT_TREE_CAP) -> list[tuple[int, ...]]:
    """All spanning trees as sorted edge-index tuples (include/exclude recursion).

    Each edge is either contracted into the tree or deleted; a branch is cut
    as soon as it would close a cycle or disconnect the graph.
    """
    if not g.connected:
        raise Disconnected("graph is not connected")
    total = count_spanning_trees(g)
    if total > cap:
        raise TooManyTrees(f"{total} spanning trees exceed the cap {cap}")
    n, m = g.n, g.m
    ends = list(zip(g.tails.tolist(), g.heads.tolist()))
    out: list[tuple[int, ...]] = []

    def find(parent, x):
        while parent[x] != x:
            x = parent[x]
        return x

    def still_connectable(chosen, start):
        parent = list(range(n))
        comps = n
        for e in list(chosen) + list(range(start, m)):
            a, b = find(parent, ends[e][0]), find(parent, ends[e][1])
            if a != b:
                parent[a] = b
                comps -= 1
        return comps == 1

    def rec(i, chosen, parent):
        if len(chosen) == n - 1:
            out.append(tuple(chosen))
            return
        if i == m:
            return
        a, b = find(parent, ends[i][0]), find(parent, ends[i][1])
        if a != b:
            p2 = parent.copy()
            p2[a] = b
            rec(i + 1, chosen + [i], p2)
        if still_connectable(chosen, i + 1):
            rec(i + 1, chosen, parent)

    rec(0, [], list(range(n)))
    return out


def tree_laplacian(g: WeightedGraph, tree: tuple[int, ...], weights: np.ndarray) -> np.ndarray:
    w = np.zeros(g.m)
    idx = list(tree)
    w[idx] = weights[idx]
    return laplacian_from_weights(g, w)
