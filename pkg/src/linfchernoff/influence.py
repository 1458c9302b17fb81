"""Influence matrices and the l-infinity / average-multiplicative dependence parameters.

Diagonal convention: the one-sided influence of ``i`` on itself is
``1 - P[xi_i = 1 | Lambda]``, i.e. the ``i``-th entry of ``p_i - p``.  With it
the one-sided parameter equals the average-multiplicative parameter exactly
for homogeneous inputs.  The off-diagonal-only row sums are reported too.
"""

from __future__ import annotations

import itertools
from math import comb
from dataclasses import dataclass, field

import numpy as np

from .distributions import (
    ConditioningSpec,
    Distribution,
    condition,
    consistent,
    indices_from_mask,
    marginals,
    popcount,
)
from .errors import GroundSetTooLarge, InfeasibleConditioning, NotHomogeneous

ONE_SIDED = "one-sided"
TWO_SIDED = "two-sided"

# max number of conditioning specs enumerated before GroundSetTooLarge
DEFAULT_MAX_SPECS = 1 << 20
TIE_TOL = 1e-12


@dataclass
class InfluenceMatrix:
    kind: str
    entries: np.ndarray
    spec: ConditioningSpec
    feasible_rows: np.ndarray

    def row_sums(self, include_diagonal: bool = True) -> np.ndarray:
        a = np.abs(self.entries)
        if not include_diagonal:
            a = a - np.diag(np.diag(a))
        return a.sum(axis=1)

    def norm_inf(self, include_diagonal: bool = True) -> float:
        rs = self.row_sums(include_diagonal)
        return float(rs.max()) if len(rs) else 0.0

    def lambda_max(self) -> float:
        """Largest real part of the spectrum; a diagnostic only."""
        if self.entries.size == 0:
            return 0.0
        return float(np.linalg.eigvals(self.entries).real.max())


@dataclass
class DependenceReport:
    kind: str
    d_inf: float
    d_inf_offdiag: float
    argmax_spec: ConditioningSpec | None
    argmax_row: int | None
    n_specs: int
    per_spec_rows: list[tuple[ConditioningSpec, int, float]] | None = None


@dataclass
class Analysis:
    """Everything :func:`analyze` computes for one distribution."""

    one_sided: DependenceReport
    two_sided: DependenceReport | None
    d_am: float | None
    ii_residual: float | None
    extra: dict = field(default_factory=dict)

    @property
    def d_inf_one_sided(self) -> float:
        return self.one_sided.d_inf

    @property
    def d_inf_two_sided(self) -> float | None:
        return None if self.two_sided is None else self.two_sided.d_inf


# --- batched kernels --------------------------------------------------------
#
# All kernels take, for a batch of A conditionings, the conditional pair-mass
# tensor J (A, n, n), per-coordinate outcome counts C (A, n) and support sizes
# S (A,).  Feasibility is decided on the counts, never on rounded masses.


def _batch_stats(mu: Distribution, member: np.ndarray):
    """Pair masses and counts for each row of the boolean membership matrix."""
    bits = mu.indicators
    n = mu.n
    wm = member * mu.probs[None, :]
    W = wm.sum(axis=1)
    J = np.einsum("as,si,sj->aij", wm, bits, bits, optimize=True)
    J /= W[:, None, None]
    C = member.astype(float) @ bits
    S = member.sum(axis=1).astype(float)
    return J.reshape(-1, n, n), C, S


def _one_sided_batch(J, C, S):
    p = np.diagonal(J, axis1=1, axis2=2)
    feasible = C > 0
    trivial = C == S[:, None]  # xi_i = 1 surely: the row is exactly zero
    active = feasible & ~trivial
    safe_p = np.where(active, p, 1.0)
    M = J / safe_p[:, :, None] - p[:, None, :]
    M = np.where(active[:, :, None], M, 0.0)
    return M, feasible


def _two_sided_batch(J, C, S):
    p = np.diagonal(J, axis1=1, axis2=2)
    active = (C > 0) & (C < S[:, None])
    safe_p = np.where(active, p, 0.5)
    M = J / safe_p[:, :, None] - (p[:, None, :] - J) / (1.0 - safe_p[:, :, None])
    M = np.where(active[:, :, None], M, 0.0)
    # xi_i is pinned on both sides of the difference
    idx = np.arange(J.shape[1])
    M[:, idx, idx] = np.where(active, 1.0, 0.0)
    return M, active


def _ami_batch(J, C, k):
    """Per-coordinate ratio E_nu|p_v(u) - p(u)| / nu(u) for each conditioning.

    Computed column-wise from the conditional marginal rows p_v, weighted by
    the pick distribution nu, independently of the row sums used for D_inf.
    """
    p = np.diagonal(J, axis1=1, axis2=2)
    present = C > 0
    safe_p = np.where(present, p, 1.0)
    P_cond = np.where(present[:, :, None], J / safe_p[:, :, None], 0.0)  # rows p_v
    nu = np.where(present, p, 0.0) / k
    dev = np.abs(P_cond - p[:, None, :])  # |p_v(u) - p(u)|
    num = np.einsum("av,avu->au", nu, dev)
    ratio = np.where(present, num / np.where(present, p / k, 1.0), 0.0)
    return ratio


# --- single-spec operations -------------------------------------------------


def _single(mu: Distribution, spec: ConditioningSpec):
    member = consistent(mu, spec)
    if not member.any():
        raise InfeasibleConditioning(f"conditioning {spec} has zero probability")
    return _batch_stats(mu, member[None, :])


def one_sided_influence(mu: Distribution, lam) -> InfluenceMatrix:
    """One-sided influence matrix given that every index in ``lam`` is 1."""
    spec = lam if isinstance(lam, ConditioningSpec) else ConditioningSpec.ones(lam)
    if not spec.one_sided:
        raise ValueError("one-sided influence pins coordinates to 1 only")
    J, C, S = _single(mu, spec)
    M, feasible = _one_sided_batch(J, C, S)
    return InfluenceMatrix(ONE_SIDED, M[0], spec, feasible[0])


def two_sided_influence(mu: Distribution, spec: ConditioningSpec | None = None) -> InfluenceMatrix:
    spec = spec if spec is not None else ConditioningSpec()
    J, C, S = _single(mu, spec)
    M, feasible = _two_sided_batch(J, C, S)
    return InfluenceMatrix(TWO_SIDED, M[0], spec, feasible[0])


# --- enumeration ------------------------------------------------------------


def _submasks(m: int):
    sub = m
    while True:
        yield sub
        if sub == 0:
            return
        sub = (sub - 1) & m


def feasible_one_sided_sets(mu: Distribution, max_lambda: int | None = None,
                            max_specs: int = DEFAULT_MAX_SPECS) -> list[int]:
    """Masks of every Lambda with P[all of Lambda = 1] > 0, by size then lexicographically."""
    max_lambda = mu.n if max_lambda is None else max_lambda
    budget = sum(1 << popcount(m) for m in mu.masks)
    if budget > max_specs * 16:
        raise GroundSetTooLarge(f"about {budget} candidate conditionings exceed the cap")
    seen = set()
    for m in mu.masks:
        for sub in _submasks(int(m)):
            if popcount(sub) <= max_lambda:
                seen.add(sub)
    if len(seen) > max_specs:
        raise GroundSetTooLarge(f"{len(seen)} feasible conditionings exceed the cap {max_specs}")
    return sorted(seen, key=lambda s: (popcount(s), indices_from_mask(s)))


def _chunks(items, n: int):
    size = max(1, 400_000 // max(1, n * n))
    for start in range(0, len(items), size):
        yield items[start:start + size]


def _iter_one_sided(mu: Distribution, max_lambda, max_specs):
    """Yield (specs, J, C, S) batches over feasible all-ones conditionings."""
    lams = feasible_one_sided_sets(mu, max_lambda, max_specs)
    masks = mu.masks
    for chunk in _chunks(lams, mu.n):
        arr = np.array(chunk, dtype=np.int64)
        member = (masks[None, :] & arr[:, None]) == arr[:, None]
        J, C, S = _batch_stats(mu, member)
        specs = [ConditioningSpec.from_masks(int(l), int(l)) for l in chunk]
        yield specs, J, C, S


def _iter_two_sided(mu: Distribution, max_lambda, max_specs):
    n = mu.n
    max_lambda = n if max_lambda is None else max_lambda
    total = sum(comb(n, r) for r in range(min(max_lambda, n) + 1))
    if total > max_specs:
        raise GroundSetTooLarge(f"{total} subsets Lambda exceed the cap {max_specs}")
    masks = mu.masks
    for r in range(min(max_lambda, n) + 1):
        for lam in itertools.combinations(range(n), r):
            lam_mask = sum(1 << i for i in lam)
            keys = masks & lam_mask
            vals = np.unique(keys)
            # lexicographic order of the assignment vector (lam[0] most significant)
            order = sorted(vals.tolist(), key=lambda v: tuple((v >> i) & 1 for i in lam))
            arr = np.array(order, dtype=np.int64)
            member = keys[None, :] == arr[:, None]
            J, C, S = _batch_stats(mu, member)
            specs = [ConditioningSpec.from_masks(lam_mask, int(v)) for v in order]
            yield specs, J, C, S


def linf_parameter(
    mu: Distribution,
    kind: str = ONE_SIDED,
    max_lambda: int | None = None,
    max_specs: int = DEFAULT_MAX_SPECS,
    record_rows: bool = False,
) -> DependenceReport:
    """Maximal influence-matrix row l1 sum over every feasible conditioning.

    ``kind`` is ``"one-sided"`` (Lambda pinned to ones) or ``"two-sided"``
    (every Lambda and every feasible assignment).  Specs are visited by
    increasing ``|Lambda|`` then lexicographically; ties keep the first seen.
    """
    if kind == ONE_SIDED:
        batches, kernel = _iter_one_sided(mu, max_lambda, max_specs), _one_sided_batch
    elif kind == TWO_SIDED:
        batches, kernel = _iter_two_sided(mu, max_lambda, max_specs), _two_sided_batch
    else:
        raise ValueError(f"unknown kind {kind!r}")
    best, best_off = 0.0, 0.0
    arg_spec, arg_row = None, None
    rows = [] if record_rows else None
    count = 0
    for specs, J, C, S in batches:
        M, _ = kernel(J, C, S)
        A = np.abs(M)
        sums = A.sum(axis=2)
        off = sums - np.diagonal(A, axis1=1, axis2=2)
        count += len(specs)
        best_off = max(best_off, float(off.max()) if off.size else 0.0)
        if sums.size:
            flat = int(np.argmax(sums))  # first occurrence
            a, i = divmod(flat, mu.n)
            if sums[a, i] > best + TIE_TOL:
                best, arg_spec, arg_row = float(sums[a, i]), specs[a], i
        if rows is not None:
            for a, spec in enumerate(specs):
                rows.extend((spec, i, float(sums[a, i])) for i in range(mu.n))
    if arg_spec is None and count:
        arg_spec, arg_row = ConditioningSpec(), 0
    return DependenceReport(kind, best, best_off, arg_spec, arg_row, count, rows)


def ami_parameter(mu: Distribution, max_lambda: int | None = None,
                  max_specs: int = DEFAULT_MAX_SPECS) -> float:
    """Smallest D_am with E_{v~nu}|I(v -> u)| <= D_am * nu(u) for all u and Lambda."""
    if not mu.homogeneous or mu.k == 0:
        raise NotHomogeneous("average multiplicative independence needs k >= 1 homogeneity")
    best = 0.0
    for _, J, C, _S in _iter_one_sided(mu, max_lambda, max_specs):
        ratio = _ami_batch(J, C, mu.k)
        if ratio.size:
            best = max(best, float(ratio.max()))
    return best


@dataclass
class IdentityCheck:
    max_residual: float
    rows: list[tuple[ConditioningSpec, int, float, float]]  # (spec, u, lhs, rhs)


def verify_ii_ami_identity(mu: Distribution, max_lambda: int | None = None,
                           max_specs: int = DEFAULT_MAX_SPECS) -> IdentityCheck:
    """Compare sum_v nu(v)|p_v(u) - p(u)| with nu(u) * ||p_u - p||_1 for every Lambda and u."""
    if not mu.homogeneous or mu.k == 0:
        raise NotHomogeneous("the identity needs a k-homogeneous distribution with k >= 1")
    k = mu.k
    worst = 0.0
    rows = []
    for specs, J, C, S in _iter_one_sided(mu, max_lambda, max_specs):
        p = np.diagonal(J, axis1=1, axis2=2)
        present = C > 0
        ratio = _ami_batch(J, C, k)
        lhs = ratio * np.where(present, p, 0.0) / k
        M, _ = _one_sided_batch(J, C, S)
        rhs = np.where(present, p, 0.0) / k * np.abs(M).sum(axis=2)
        res = np.abs(lhs - rhs)
        if res.size:
            worst = max(worst, float(res.max()))
        for a, spec in enumerate(specs):
            for u in range(mu.n):
                if present[a, u]:
                    rows.append((spec, u, float(lhs[a, u]), float(rhs[a, u])))
    return IdentityCheck(worst, rows)


def bayes_symmetry_residual(mu: Distribution, spec: ConditioningSpec | None = None) -> float:
    """max |nu(u) p_u(v) - nu(v) p_v(u)| with p_u obtained by explicit conditioning."""
    if not mu.homogeneous or mu.k == 0:
        raise NotHomogeneous("pick distribution needs k >= 1 homogeneity")
    base = mu if spec is None else condition(mu, spec)
    p = marginals(base)
    nu = p / mu.k
    n = mu.n
    P = np.zeros((n, n))
    for u in range(n):
        if p[u] > 0:
            P[u] = marginals(condition(base, ConditioningSpec.ones([u])))
    lhs = nu[:, None] * P
    return float(np.abs(lhs - lhs.T).max()) if n else 0.0


def analyze(mu: Distribution, two_sided: bool = True, max_lambda: int | None = None,
            max_specs: int = DEFAULT_MAX_SPECS, record_rows: bool = False) -> Analysis:
    one = linf_parameter(mu, ONE_SIDED, max_lambda, max_specs, record_rows)
    two = linf_parameter(mu, TWO_SIDED, max_lambda, max_specs, record_rows) if two_sided else None
    d_am = resid = None
    if mu.homogeneous and mu.k:
        d_am = ami_parameter(mu, max_lambda, max_specs)
        resid = verify_ii_ami_identity(mu, max_lambda, max_specs).max_residual
    return Analysis(one, two, d_am, resid)
