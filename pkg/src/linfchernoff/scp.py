"""Stochastic covering property for explicit distributions.

For every feasible all-ones pinning ``tau`` and every free ``v`` whose two
conditionals are both feasible, SCP asks for a coupling of

* ``xi''``: the coordinates off ``tau + {v}`` given ``xi_v = 1``, and
* ``xi'``:  the same coordinates given ``xi_v = 0``,

such that ``xi'`` is ``xi''`` or ``xi''`` with one extra 1.  A coupling is a
transport plan restricted to those pairs, so its existence is a max-flow
question on a bipartite network.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import networkx as nx
import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_flow

from .distributions import DEFAULT_MAX_N, Distribution, indices_from_mask
from .errors import GroundSetTooLarge, NotHomogeneous, PreconditionError
from .influence import DEFAULT_MAX_SPECS, TWO_SIDED, feasible_one_sided_sets, linf_parameter

FLOW_TOL = 1e-9
# scipy's max-flow works in int32
_MAX_DENOMINATOR = 1 << 30


@dataclass
class CouplingInstance:
    tau: tuple[int, ...]
    v: int
    left_masks: np.ndarray
    left_mass: np.ndarray
    right_masks: np.ndarray
    right_mass: np.ndarray
    allowed_pairs: list[tuple[int, int]]


@dataclass
class ScpResult:
    ok: bool
    witness: tuple[tuple[int, ...], int] | None
    instances: int

    def __bool__(self) -> bool:
        return self.ok


def _restricted(masks, probs, keep_mask):
    sub = masks & keep_mask
    uniq, inv = np.unique(sub, return_inverse=True)
    mass = np.bincount(inv.ravel(), weights=probs, minlength=len(uniq))
    return uniq, mass / mass.sum()


def coupling_instance(mu: Distribution, tau_mask: int, v: int) -> CouplingInstance | None:
    """Build the transport instance for ``(tau, v)``; None if either side is infeasible."""
    bit = 1 << v
    if tau_mask & bit:
        raise ValueError("v must lie outside tau")
    given = (mu.masks & tau_mask) == tau_mask
    with_v = given & ((mu.masks & bit) != 0)
    without_v = given & ((mu.masks & bit) == 0)
    if not with_v.any() or not without_v.any():
        return None
    keep = ((1 << mu.n) - 1) & ~(tau_mask | bit)
    lm, lp = _restricted(mu.masks[with_v], mu.probs[with_v], keep)
    rm, rp = _restricted(mu.masks[without_v], mu.probs[without_v], keep)
    diff_sub = (lm[:, None] & ~rm[None, :]) == 0  # x'' contained in x'
    extra = rm[None, :] ^ lm[:, None]
    single = (extra & (extra - 1)) == 0  # zero or one differing bit
    li, ri = np.nonzero(diff_sub & single)
    pairs = list(zip(li.tolist(), ri.tolist()))
    return CouplingInstance(indices_from_mask(tau_mask), v, lm, lp, rm, rp, pairs)


def _as_integers(masses: np.ndarray):
    """Scale masses to integers over a common denominator if that is exact enough."""
    fracs = [Fraction(float(m)).limit_denominator(1 << 20) for m in masses]
    if any(abs(float(f) - m) > 4e-16 * max(1.0, m) for f, m in zip(fracs, masses)):
        return None
    den = 1
    for f in fracs:
        den = den * f.denominator // math.gcd(den, f.denominator)
        if den > _MAX_DENOMINATOR:
            return None
    ints = [f.numerator * (den // f.denominator) for f in fracs]
    if sum(ints) != den:
        return None
    return ints, den


def _flow_integer(inst: CouplingInstance, lint, rint, den) -> bool:
    L, R = len(lint), len(rint)
    src, sink = 0, L + R + 1
    rows, cols, caps = [], [], []
    for i, c in enumerate(lint):
        rows.append(src); cols.append(1 + i); caps.append(c)
    for j, c in enumerate(rint):
        rows.append(1 + L + j); cols.append(sink); caps.append(c)
    for i, j in inst.allowed_pairs:
        rows.append(1 + i); cols.append(1 + L + j); caps.append(den)
    graph = csr_matrix((np.array(caps, dtype=np.int32), (rows, cols)), shape=(sink + 1, sink + 1))
    return maximum_flow(graph, src, sink).flow_value == den


def _flow_float(inst: CouplingInstance) -> bool:
    g = nx.DiGraph()
    for i, m in enumerate(inst.left_mass):
        g.add_edge("s", ("L", i), capacity=float(m))
    for j, m in enumerate(inst.right_mass):
        g.add_edge(("R", j), "t", capacity=float(m))
    for i, j in inst.allowed_pairs:
        g.add_edge(("L", i), ("R", j))  # no capacity attribute: unbounded
    if "s" not in g or "t" not in g:
        return False
    return nx.maximum_flow_value(g, "s", "t") >= 1.0 - FLOW_TOL


def coupling_exists(inst: CouplingInstance) -> bool:
    """Max-flow decision: exact integer flow when masses rationalize, float flow otherwise."""
    if not inst.allowed_pairs:
        return False
    left = _as_integers(inst.left_mass)
    right = _as_integers(inst.right_mass)
    if left and right:
        den = left[1] * right[1] // math.gcd(left[1], right[1])
        if den <= _MAX_DENOMINATOR:
            lint = [x * (den // left[1]) for x in left[0]]
            rint = [x * (den // right[1]) for x in right[0]]
            return _flow_integer(inst, lint, rint, den)
    return _flow_float(inst)


def coupling_exists_hall(inst: CouplingInstance, tol: float = FLOW_TOL) -> bool:
    """Exhaustive supply-demand check: every left subset fits into its neighbourhood.

    Exponential in the left support; an oracle for small instances only.
    """
    L = len(inst.left_mass)
    nbrs = [set() for _ in range(L)]
    for i, j in inst.allowed_pairs:
        nbrs[i].add(j)
    for r in range(1, L + 1):
        for subset in itertools.combinations(range(L), r):
            supply = sum(inst.left_mass[i] for i in subset)
            reach = set().union(*(nbrs[i] for i in subset))
            demand = sum(inst.right_mass[j] for j in reach)
            if supply > demand + tol:
                return False
    return True


def iter_instances(mu: Distribution, max_specs: int = DEFAULT_MAX_SPECS):
    for tau in feasible_one_sided_sets(mu, max_specs=max_specs):
        for v in range(mu.n):
            if tau >> v & 1:
                continue
            inst = coupling_instance(mu, tau, v)
            if inst is not None:
                yield inst


def check_scp(mu: Distribution, max_n: int = DEFAULT_MAX_N,
              max_specs: int = DEFAULT_MAX_SPECS) -> ScpResult:
    """Decide SCP; on failure the witness is the first violating ``(tau, v)`` (0-based)."""
    if mu.n > max_n:
        raise GroundSetTooLarge(f"n={mu.n} exceeds the SCP enumeration cap {max_n}")
    count = 0
    for inst in iter_instances(mu, max_specs):
        count += 1
        if not coupling_exists(inst):
            return ScpResult(False, (inst.tau, inst.v), count)
    return ScpResult(True, None, count)


def verify_scp_implies_twosided(mu: Distribution, bound: float = 2.0, tol: float = 1e-9) -> bool:
    """For a homogeneous SCP distribution, check the two-sided parameter is at most 2."""
    if not mu.homogeneous:
        raise NotHomogeneous("the SCP bound is stated for homogeneous distributions")
    res = check_scp(mu)
    if not res.ok:
        raise PreconditionError(f"distribution is not SCP; witness {res.witness}")
    return linf_parameter(mu, TWO_SIDED).d_inf <= bound + tol
