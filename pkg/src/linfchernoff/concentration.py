"""Matrix Chernoff machinery for sums ``sum_i xi_i Y_i`` with ``xi ~ mu``.

Every matrix function is evaluated through a symmetric eigendecomposition
with eigenvalues clamped to ``[-700, 700]`` before exponentiation.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Protocol

import numpy as np

from .distributions import (
    ConditioningSpec,
    Distribution,
    condition,
    marginals,
    pair_marginals,
    pick_distribution,
    sample_many,
)
from .errors import (
    CTooSmall,
    DimensionMismatch,
    NonPositiveD,
    NotHomogeneous,
    PreconditionError,
    ThetaOutOfRange,
)
from .influence import ONE_SIDED, TWO_SIDED, ami_parameter, linf_parameter

EXP_CLAMP = 700.0
SYM_TOL = 1e-12
PSD_TOL = 1e-10
DEFAULT_CONSTANT = 20.0
EXACT_SUPPORT_LIMIT = 10_000
# conservative event test: boundary hits count as tail events
EVENT_TOL = 1e-12

MAX, MIN = "max", "min"


@dataclass
class MatrixEnsemble:
    """Symmetric PSD matrices ``Y_1..Y_n`` of size ``d`` with ``Y_i <= r_cap * I``."""

    mats: np.ndarray
    r_cap: float = 1.0

    def __post_init__(self):
        mats = np.asarray(self.mats, dtype=float)
        if mats.ndim != 3 or mats.shape[1] != mats.shape[2]:
            raise DimensionMismatch(f"expected an (n, d, d) stack, got shape {mats.shape}")
        if self.r_cap <= 0:
            raise ValueError("r_cap must be positive")
        if mats.size:
            if np.abs(mats - mats.transpose(0, 2, 1)).max() > SYM_TOL:
                raise ValueError("ensemble matrices must be symmetric")
            eig = np.linalg.eigvalsh(mats)
            if eig.min() < -PSD_TOL:
                raise ValueError(f"ensemble matrix not PSD (lambda_min={eig.min():.3g})")
            if eig.max() > self.r_cap + PSD_TOL:
                raise ValueError(f"lambda_max {eig.max():.6g} exceeds R={self.r_cap}")
        mats.setflags(write=False)
        self.mats = mats

    @property
    def n(self) -> int:
        return self.mats.shape[0]

    @property
    def d(self) -> int:
        return self.mats.shape[1]

    def normalized(self) -> "MatrixEnsemble":
        return MatrixEnsemble(self.mats / self.r_cap, 1.0)

    def padded(self, extra: int) -> "MatrixEnsemble":
        """Append ``extra`` zero matrices (used with homogenization)."""
        z = np.zeros((extra, self.d, self.d))
        return MatrixEnsemble(np.concatenate([self.mats, z]), self.r_cap)

    def sums(self, indicators: np.ndarray) -> np.ndarray:
        """``sum_i x_i Y_i`` for every row ``x`` of an indicator matrix."""
        return np.tensordot(indicators, self.mats, axes=(1, 0))


def _check_dims(mu: Distribution, ens: MatrixEnsemble):
    if ens.n != mu.n:
        raise DimensionMismatch(f"ensemble has {ens.n} matrices, distribution has n={mu.n}")


def sym_apply(a: np.ndarray, f) -> np.ndarray:
    w, v = np.linalg.eigh(a)
    return (v * f(w)[..., None, :]) @ np.swapaxes(v, -1, -2)


def expm_sym(a: np.ndarray) -> np.ndarray:
    return sym_apply(a, lambda w: np.exp(np.clip(w, -EXP_CLAMP, EXP_CLAMP)))


def trace_exp(a: np.ndarray) -> np.ndarray:
    """``tr(exp(a))`` for a symmetric matrix or a stack of them."""
    w = np.linalg.eigvalsh(a)
    return np.exp(np.clip(w, -EXP_CLAMP, EXP_CLAMP)).sum(axis=-1)


def lambda_max(a: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(a)[-1])


def lambda_min(a: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(a)[0])


# --- expectations -------------------------------------------------------------


def expected_sum(mu: Distribution, ens: MatrixEnsemble) -> np.ndarray:
    _check_dims(mu, ens)
    return np.tensordot(marginals(mu), ens.mats, axes=(0, 0))


def expected_spectrum(mu: Distribution, ens: MatrixEnsemble) -> tuple[float, float]:
    w = np.linalg.eigvalsh(expected_sum(mu, ens))
    return float(w[0]), float(w[-1])


@dataclass
class ZvMatrix:
    v: int
    z: np.ndarray


def z_matrix(mu: Distribution, ens: MatrixEnsemble, v: int) -> ZvMatrix:
    """Shift ``E[S | xi_v = 1] - E[S]`` of the expected sum caused by pinning ``v``."""
    _check_dims(mu, ens)
    p = marginals(mu)
    pv = marginals(condition(mu, ConditioningSpec.ones([v])))
    return ZvMatrix(v, np.tensordot(pv - p, ens.mats, axes=(0, 0)))


def z_matrices(mu: Distribution, ens: MatrixEnsemble) -> tuple[np.ndarray, np.ndarray]:
    """All ``Z_v`` at once from pair marginals; returns (z stack, feasible v mask)."""
    _check_dims(mu, ens)
    J = pair_marginals(mu)
    p = np.diag(J).copy()
    feasible = (mu.indicators.sum(axis=0) > 0)
    P = np.where(feasible[:, None], J / np.where(feasible, p, 1.0)[:, None], 0.0)
    shift = np.where(feasible[:, None], P - p[None, :], 0.0)
    return np.tensordot(shift, ens.mats, axes=(1, 0)), feasible


def _require_unit_cap(ens: MatrixEnsemble):
    if ens.r_cap > 1.0 + 1e-12:
        raise PreconditionError("this check needs an ensemble normalized to R = 1")


@dataclass
class ZvClaimReport:
    d_inf: float
    d_am: float
    margin_upper: float  # max_v lambda_max(Z_v - D_inf I); must be <= 0
    margin_variance: float  # lambda_min(D_inf D_am E_nu[Y_v] - E_nu[Z_v^2]); must be >= 0
    mean_z_residual: float  # max |E_nu[Z_v]|
    tol: float = 1e-9

    @property
    def ok(self) -> bool:
        return self.margin_upper <= self.tol and self.margin_variance >= -self.tol


def check_claim_bound_zv(mu: Distribution, ens: MatrixEnsemble,
                         d_inf: float | None = None, d_am: float | None = None) -> ZvClaimReport:
    """Check ``Z_v <= D_inf I`` and ``E_nu[Z_v^2] <= D_inf D_am E_nu[Y_v]``."""
    if not mu.homogeneous or not mu.k:
        raise NotHomogeneous("the Z_v bounds need a k-homogeneous distribution, k >= 1")
    _require_unit_cap(ens)
    if d_inf is None:
        d_inf = linf_parameter(mu, ONE_SIDED).d_inf
    if d_am is None:
        d_am = ami_parameter(mu)
    nu = pick_distribution(mu)
    Z, feasible = z_matrices(mu, ens)
    d = ens.d
    upper = max((lambda_max(Z[v] - d_inf * np.eye(d)) for v in range(mu.n) if feasible[v]),
                default=-d_inf)
    ez2 = np.einsum("v,vij,vjk->ik", nu, Z, Z)
    ey = np.tensordot(nu, ens.mats, axes=(0, 0))
    variance = lambda_min(d_inf * d_am * ey - ez2)
    mean_z = float(np.abs(np.tensordot(nu, Z, axes=(0, 0))).max())
    return ZvClaimReport(d_inf, d_am, upper, variance, mean_z)


def _check_theta(theta: float, c: float):
    if c < 0:
        raise ValueError("c must be non-negative")
    if c > 0 and abs(theta) > 1.0 / (2.0 * c) * (1 + 1e-12):
        raise ThetaOutOfRange(f"|theta|={abs(theta)} exceeds 1/(2c)={1 / (2 * c)}")


def _warn_small_c(c, d_inf, d_am):
    if d_inf is not None and d_am is not None and c < 5.0 * d_inf * d_am - 1e-12:
        warnings.warn(f"c={c} < 5 * D_inf * D_am = {5 * d_inf * d_am}", CTooSmall, stacklevel=3)


def trace_mgf_check(mu: Distribution, ens: MatrixEnsemble, theta: float,
                    H: np.ndarray | None = None, c: float = 5.0,
                    d_inf: float | None = None, d_am: float | None = None) -> tuple[float, float]:
    """Both sides of ``tr E[e^{H + theta S}] <= tr e^{H + (theta + c theta^2) E[S]}``.

    The left side is an exact sum over the support.  Callers compare them.
    """
    _check_dims(mu, ens)
    _require_unit_cap(ens)
    _check_theta(theta, c)
    _warn_small_c(c, d_inf, d_am)
    d = ens.d
    H = np.zeros((d, d)) if H is None else np.asarray(H, dtype=float)
    if H.shape != (d, d):
        raise DimensionMismatch(f"H must be {d}x{d}")
    S = ens.sums(mu.indicators)
    lhs = float(mu.probs @ trace_exp(H[None] + theta * S))
    rhs = float(trace_exp(H + (theta + c * theta ** 2) * expected_sum(mu, ens)))
    return lhs, rhs


def second_part_check(mu: Distribution, ens: MatrixEnsemble, theta: float, c: float = 5.0,
                      d_inf: float | None = None, d_am: float | None = None) -> float:
    """``lambda_max(E_nu[exp((theta + c theta^2) Z_v - c theta^2 Y_v)]) - 1``."""
    _check_dims(mu, ens)
    _require_unit_cap(ens)
    _check_theta(theta, c)
    _warn_small_c(c, d_inf, d_am)
    nu = pick_distribution(mu)
    Z, feasible = z_matrices(mu, ens)
    a = theta + c * theta ** 2
    b = c * theta ** 2
    idx = np.nonzero(feasible & (nu > 0))[0]
    E = np.tensordot(nu[idx], expm_sym(a * Z[idx] - b * ens.mats[idx]), axes=(0, 0))
    return lambda_max(E) - 1.0


# --- tail bounds --------------------------------------------------------------


def tail_bound(delta: float, mu_extreme: float, D: float, d: int, R: float = 1.0,
               constant: float = DEFAULT_CONSTANT) -> float:
    """``d * exp(-delta^2 mu / (constant * R * D^2))``."""
    if D <= 0:
        raise NonPositiveD(f"dependence parameter must be positive, got {D}")
    if not 0.0 <= delta <= 1.0:
        raise ValueError("delta must lie in [0, 1]")
    if mu_extreme < 0:
        raise ValueError("mu_extreme must be non-negative")
    if R <= 0:
        raise ValueError("R must be positive")
    return d * math.exp(-delta ** 2 * mu_extreme / (constant * R * D ** 2))


def centered_tail_bound(delta: float, mu_extreme: float, D_two_sided: float, d: int,
                        R: float = 1.0, constant: float = DEFAULT_CONSTANT) -> float:
    """Centered bound for non-homogeneous inputs via homogenization (parameter 2D)."""
    return tail_bound(delta, mu_extreme, 2.0 * D_two_sided, d, R, constant)


def _bound_or_limit(delta, mu_extreme, D, d, R, constant):
    # D = 0 means a deterministic sum; the bound's limit as D -> 0
    if D <= 0:
        return 0.0 if delta * mu_extreme > 0 else float(d)
    return tail_bound(delta, mu_extreme, D, d, R, constant)


def tail_events(sums: np.ndarray, expected: np.ndarray, delta: float, side: str,
                centered: bool) -> np.ndarray:
    """Boolean tail-event indicator for each sample sum."""
    w = np.linalg.eigvalsh(expected)
    mu_min, mu_max = w[0], w[-1]
    if centered:
        eig = np.linalg.eigvalsh(sums - expected[None])
        if side == MAX:
            return eig[:, -1] >= delta * mu_max - EVENT_TOL
        return eig[:, 0] <= -delta * mu_min + EVENT_TOL
    eig = np.linalg.eigvalsh(sums)
    if side == MAX:
        return eig[:, -1] >= (1 + delta) * mu_max - EVENT_TOL
    return eig[:, 0] <= (1 - delta) * mu_min + EVENT_TOL


class IndicatorSource(Protocol):
    """Anything that can draw 0/1 outcome rows and knows its marginals."""

    def sample_indicators(self, rng: np.random.Generator, size: int) -> np.ndarray: ...

    def marginals(self) -> np.ndarray: ...


@dataclass
class TailResult:
    delta: float
    side: str
    empirical: float
    bound: float
    exact: bool
    trials: int
    D: float
    mu_extreme: float
    centered: bool
    extra: dict = field(default_factory=dict)

    @property
    def slack(self) -> float:
        """Allowed sampling excess: 3 binomial standard deviations at the bound."""
        if self.exact:
            return 0.0
        b = min(self.bound, 1.0)
        return 3.0 * math.sqrt(b * (1.0 - b) / self.trials)

    @property
    def ok(self) -> bool:
        return self.empirical <= self.bound + self.slack


def dependence_for_tail(mu: Distribution) -> tuple[float, bool]:
    """(D, centered): one-sided D_inf when homogeneous, else twice the two-sided parameter."""
    if mu.homogeneous:
        return linf_parameter(mu, ONE_SIDED).d_inf, False
    return 2.0 * linf_parameter(mu, TWO_SIDED).d_inf, True


def monte_carlo_tail(source, ens: MatrixEnsemble, delta: float, side: str = MAX,
                     trials: int = 10_000, rng: np.random.Generator | None = None,
                     D: float | None = None, centered: bool | None = None,
                     constant: float = DEFAULT_CONSTANT,
                     exact_limit: int = EXACT_SUPPORT_LIMIT,
                     batch: int = 4096) -> TailResult:
    """Tail probability of the spectrum of ``sum_i xi_i Y_i`` against the Chernoff bound.

    ``source`` is a :class:`Distribution` (exact enumeration when the support
    is at most ``exact_limit``) or any :class:`IndicatorSource`.  ``D`` and
    ``centered`` default to :func:`dependence_for_tail` for distributions and
    must be supplied for other sources.
    """
    if side not in (MAX, MIN):
        raise ValueError("side must be 'max' or 'min'")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if isinstance(source, Distribution):
        _check_dims(source, ens)
        if D is None:
            D, auto_centered = dependence_for_tail(source)
            centered = auto_centered if centered is None else centered
        p = marginals(source)
    else:
        if D is None:
            raise ValueError("D is required for non-distribution sources")
        p = np.asarray(source.marginals(), dtype=float)
        if len(p) != ens.n:
            raise DimensionMismatch("source marginals do not match the ensemble")
    centered = bool(centered)
    expected = np.tensordot(p, ens.mats, axes=(0, 0))
    w = np.linalg.eigvalsh(expected)
    mu_ext = float(w[-1] if side == MAX else w[0])
    bound = _bound_or_limit(delta, max(mu_ext, 0.0), D, ens.d, ens.r_cap, constant)

    if isinstance(source, Distribution) and source.support_size <= exact_limit:
        hits = tail_events(ens.sums(source.indicators), expected, delta, side, centered)
        emp = float(source.probs[hits].sum())
        return TailResult(delta, side, emp, bound, True, trials, D, mu_ext, centered)

    rng = np.random.default_rng() if rng is None else rng
    count = 0
    done = 0
    while done < trials:
        m = min(batch, trials - done)
        if isinstance(source, Distribution):
            masks = sample_many(source, rng, m)
            x = ((masks[:, None] >> np.arange(source.n)) & 1).astype(float)
        else:
            x = source.sample_indicators(rng, m)
        count += int(tail_events(ens.sums(x), expected, delta, side, centered).sum())
        done += m
    return TailResult(delta, side, count / trials, bound, False, trials, D, mu_ext, centered)


# --- matrix facts -------------------------------------------------------------


def random_symmetric(rng: np.random.Generator, d: int, scale: float = 1.0) -> np.ndarray:
    g = rng.standard_normal((d, d)) * scale
    return (g + g.T) / 2.0


def fact_square_slack(A: np.ndarray, B: np.ndarray) -> float:
    """``lambda_min(A^2 + B^2 - AB - BA)``; non-negative for symmetric A, B."""
    return lambda_min(A @ A + B @ B - A @ B - B @ A)


def fact_exp_slack(A: np.ndarray, B: np.ndarray) -> float:
    """``lambda_min(I + A - B + 2A^2 + 2B^2 - e^{A-B})`` for ``A <= I``, ``B >= 0``."""
    d = A.shape[0]
    rhs = np.eye(d) + A - B + 2 * A @ A + 2 * B @ B
    return lambda_min(rhs - expm_sym(A - B))


def golden_thompson_slack(A: np.ndarray, B: np.ndarray) -> float:
    """``tr(e^A e^B) - tr(e^{A+B})``; non-negative for symmetric A, B."""
    return float(np.trace(expm_sym(A) @ expm_sym(B)) - trace_exp(A + B))


@dataclass
class FactReport:
    square: np.ndarray = field(repr=False)
    exp: np.ndarray = field(repr=False)
    golden_thompson: np.ndarray = field(repr=False)
    tol: float = 1e-8

    def worst(self) -> dict[str, float]:
        return {"square": float(self.square.min()), "exp": float(self.exp.min()),
                "golden_thompson": float(self.golden_thompson.min())}

    @property
    def ok(self) -> bool:
        return all(arr.min() >= -self.tol for arr in (self.square, self.exp, self.golden_thompson))


def matrix_fact_checks(rng: np.random.Generator, pairs: int = 100, d: int = 4) -> FactReport:
    """Evaluate the three matrix inequalities on seeded random pairs."""
    sq, ex, gt = [], [], []
    for _ in range(pairs):
        A = random_symmetric(rng, d)
        B = random_symmetric(rng, d)
        sq.append(fact_square_slack(A, B))
        gt.append(golden_thompson_slack(A, B))
        # A <= I: shift the spectrum so lambda_max(A) lands in [-1, 1]
        A1 = random_symmetric(rng, d)
        A1 -= (lambda_max(A1) - rng.uniform(-1.0, 1.0)) * np.eye(d)
        G = rng.standard_normal((d, d))
        B1 = G @ G.T * rng.uniform(0.05, 1.0)
        ex.append(fact_exp_slack(A1, B1))
    return FactReport(np.array(sq), np.array(ex), np.array(gt))
