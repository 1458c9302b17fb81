"""Explicit distributions over {0,1}^n.

An outcome is a subset of the ground set ``range(n)`` stored as an integer bit
mask (bit ``i`` set means ``xi_i = 1``).  A :class:`Distribution` holds the
support masks in increasing order together with their probabilities.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping

import numpy as np

from .errors import (
    AllZeroWeights,
    GroundSetTooLarge,
    InfeasibleConditioning,
    MaskOutOfRange,
    NegativeWeight,
    NotHomogeneous,
)

DEFAULT_MAX_N = 24
# hard limit of the int64 mask representation
MASK_BITS = 62
NORMALIZATION_TOL = 1e-12


def mask_from_indices(indices: Iterable[int]) -> int:
    m = 0
    for i in indices:
        if i < 0:
            raise MaskOutOfRange(f"negative index {i}")
        m |= 1 << int(i)
    return m


def indices_from_mask(mask: int) -> tuple[int, ...]:
    mask = int(mask)
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


def popcount(mask: int) -> int:
    return bin(int(mask)).count("1")


@dataclass(frozen=True)
class ConditioningSpec:
    """A pinning ``xi_l = assignment[l]`` for every ``l`` in ``lam``.

    ``assignment`` is kept as a sorted tuple of ``(index, value)`` pairs so the
    spec is hashable and orders deterministically.
    """

    assignment: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        pairs = tuple(sorted((int(i), int(v)) for i, v in self.assignment))
        idx = [i for i, _ in pairs]
        if len(set(idx)) != len(idx):
            raise ValueError("duplicate index in conditioning assignment")
        if any(v not in (0, 1) for _, v in pairs):
            raise ValueError("assignment values must be 0 or 1")
        object.__setattr__(self, "assignment", pairs)

    @classmethod
    def ones(cls, lam: Iterable[int]) -> "ConditioningSpec":
        return cls(tuple((int(i), 1) for i in lam))

    @classmethod
    def from_mapping(cls, mapping: Mapping[int, int]) -> "ConditioningSpec":
        return cls(tuple(mapping.items()))

    @classmethod
    def from_masks(cls, lam_mask: int, value_mask: int) -> "ConditioningSpec":
        return cls(tuple((i, (value_mask >> i) & 1) for i in indices_from_mask(lam_mask)))

    @property
    def lam(self) -> tuple[int, ...]:
        return tuple(i for i, _ in self.assignment)

    @property
    def lam_mask(self) -> int:
        return mask_from_indices(self.lam)

    @property
    def value_mask(self) -> int:
        return mask_from_indices(i for i, v in self.assignment if v == 1)

    @property
    def one_sided(self) -> bool:
        return all(v == 1 for _, v in self.assignment)

    def __len__(self) -> int:
        return len(self.assignment)

    def __str__(self) -> str:
        # 1-based, matching the file formats
        return "{" + ",".join(f"{i + 1}={v}" for i, v in self.assignment) + "}"


class Distribution:
    """Immutable probability mass over subsets of ``range(n)``.

    Build instances with :func:`build_distribution`; the constructor assumes
    its inputs are already sorted, merged and normalized.
    """

    def __init__(self, n: int, masks: np.ndarray, probs: np.ndarray, k: int | None):
        self.n = int(n)
        self.masks = np.asarray(masks, dtype=np.int64)
        self.probs = np.asarray(probs, dtype=float)
        self.masks.setflags(write=False)
        self.probs.setflags(write=False)
        self.k = k

    @property
    def homogeneous(self) -> bool:
        return self.k is not None

    @property
    def support_size(self) -> int:
        return len(self.masks)

    @cached_property
    def indicators(self) -> np.ndarray:
        """0/1 matrix of shape (support, n); row s is the outcome vector."""
        shifts = np.arange(self.n, dtype=np.int64)
        bits = ((self.masks[:, None] >> shifts[None, :]) & 1).astype(float)
        bits.setflags(write=False)
        return bits

    def support(self) -> list[tuple[tuple[int, ...], float]]:
        return [(indices_from_mask(m), float(p)) for m, p in zip(self.masks, self.probs)]

    def prob_of(self, indices: Iterable[int]) -> float:
        m = mask_from_indices(indices)
        pos = np.searchsorted(self.masks, m)
        if pos < len(self.masks) and self.masks[pos] == m:
            return float(self.probs[pos])
        return 0.0

    def __repr__(self) -> str:
        kind = f"{self.k}-homogeneous" if self.homogeneous else "non-homogeneous"
        return f"Distribution(n={self.n}, support={self.support_size}, {kind})"


def _from_arrays(n: int, masks: np.ndarray, weights: np.ndarray) -> Distribution:
    keep = weights > 0
    masks, weights = masks[keep], weights[keep]
    if len(masks) == 0 or weights.sum() <= 0:
        raise AllZeroWeights("no outcome carries positive weight")
    uniq, inv = np.unique(masks, return_inverse=True)
    merged = np.bincount(inv.ravel(), weights=weights, minlength=len(uniq))
    probs = merged / merged.sum()
    counts = {popcount(m) for m in uniq}
    k = counts.pop() if len(counts) == 1 else None
    return Distribution(n, uniq, probs, k)


def build_distribution(
    n: int,
    entries: Iterable[tuple[Iterable[int] | int, float]],
    max_n: int = DEFAULT_MAX_N,
) -> Distribution:
    """Normalize weighted outcomes into a :class:`Distribution`.

    Each entry is ``(outcome, weight)`` where the outcome is either an
    iterable of 0-based indices or an integer mask.  Duplicate outcomes are
    merged, zero-weight outcomes dropped and homogeneity detected.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    if n > min(max_n, MASK_BITS):
        raise GroundSetTooLarge(f"n={n} exceeds the ground-set cap {min(max_n, MASK_BITS)}")
    masks, weights = [], []
    limit = 1 << n
    for outcome, w in entries:
        m = int(outcome) if isinstance(outcome, (int, np.integer)) else mask_from_indices(outcome)
        if m < 0 or m >= limit:
            raise MaskOutOfRange(f"outcome {indices_from_mask(m) if m >= 0 else m} outside ground set of size {n}")
        w = float(w)
        if not np.isfinite(w):
            raise ValueError(f"non-finite weight {w}")
        if w < 0:
            raise NegativeWeight(f"weight {w} < 0")
        masks.append(m)
        weights.append(w)
    return _from_arrays(n, np.array(masks, dtype=np.int64), np.array(weights, dtype=float))


def point_mass(n: int, outcome: Iterable[int]) -> Distribution:
    return build_distribution(n, [(outcome, 1.0)], max_n=MASK_BITS)


def marginals(mu: Distribution) -> np.ndarray:
    """Vector ``p`` with ``p[i] = P[xi_i = 1]``."""
    return mu.probs @ mu.indicators


def pair_marginals(mu: Distribution) -> np.ndarray:
    """Matrix ``J`` with ``J[i, j] = P[xi_i = 1 and xi_j = 1]``."""
    bits = mu.indicators
    return (bits * mu.probs[:, None]).T @ bits


def consistent(mu: Distribution, spec: ConditioningSpec) -> np.ndarray:
    """Boolean mask over the support selecting outcomes that agree with ``spec``."""
    lam, val = spec.lam_mask, spec.value_mask
    if lam >= (1 << mu.n) or any(i >= mu.n for i in spec.lam):
        raise MaskOutOfRange(f"conditioning {spec} outside ground set of size {mu.n}")
    return (mu.masks & lam) == val


def condition(mu: Distribution, spec: ConditioningSpec) -> Distribution:
    """Condition on ``spec``; the ground set is unchanged."""
    keep = consistent(mu, spec)
    if not keep.any():
        raise InfeasibleConditioning(f"conditioning {spec} has zero probability")
    probs = mu.probs[keep]
    return Distribution(mu.n, mu.masks[keep], probs / probs.sum(), mu.k)


def pick_distribution(mu: Distribution) -> np.ndarray:
    """``nu(v) = p(v) / k`` for a k-homogeneous distribution with k >= 1."""
    if not mu.homogeneous or mu.k == 0:
        raise NotHomogeneous("pick distribution needs a k-homogeneous distribution with k >= 1")
    return marginals(mu) / mu.k


def homogenize(mu: Distribution) -> Distribution:
    """Pad each outcome ``s`` with ``{i + n : i not in s}`` to get an n-homogeneous law on 2n."""
    n = mu.n
    if 2 * n > MASK_BITS:
        raise GroundSetTooLarge(f"homogenization needs 2n={2 * n} bits")
    full = (1 << n) - 1
    masks = mu.masks | ((~mu.masks & full) << n)
    order = np.argsort(masks)
    return Distribution(2 * n, masks[order], mu.probs[order], n)


def sample(mu: Distribution, rng: np.random.Generator) -> int:
    """One exact draw by inverse CDF over the sorted support; returns a mask."""
    return int(sample_many(mu, rng, 1)[0])


def sample_many(mu: Distribution, rng: np.random.Generator, size: int) -> np.ndarray:
    cdf = np.cumsum(mu.probs)
    u = rng.random(size) * cdf[-1]
    idx = np.searchsorted(cdf, u, side="right")
    return mu.masks[np.minimum(idx, len(cdf) - 1)]


def check_invariants(mu: Distribution, tol: float = NORMALIZATION_TOL) -> None:
    """Raise AssertionError if ``mu`` violates a representation invariant."""
    assert abs(mu.probs.sum() - 1.0) <= tol, "probabilities do not sum to 1"
    assert (mu.probs > 0).all(), "zero-mass outcome in support"
    assert len(np.unique(mu.masks)) == len(mu.masks), "duplicate outcome"
    assert (mu.masks >= 0).all() and (mu.masks < (1 << mu.n)).all(), "mask out of range"
    if mu.k is not None:
        assert all(popcount(m) == mu.k for m in mu.masks), "homogeneity mismatch"
