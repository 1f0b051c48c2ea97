"""Thresholds and tail bounds for the sampled two-community model.

All closed forms are evaluated at the epsilon -> 0+ limit of the underlying
Chernoff argument; no epsilon parameter appears at runtime. The exact
binomial-difference tail is an independent dense-convolution oracle kept
deliberately separate from the closed-form bound.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, xlogy

from .errors import CapacityError, DomainError, ParameterError

# below / above: which side of the exact-recovery threshold (alpha, beta) fall on
BELOW = "below"
ABOVE = "above"
BOUNDARY = "boundary"

_CONVOLUTION_CAP = 100_000
# t = 0 (the trivial bound 1) must be a candidate: when K1 p = K2 q the
# optimum sits exactly there and every positive t gives a bound above 1
_DEFAULT_T_GRID = 0.01 * np.arange(0, 2001)


@dataclass(frozen=True)
class BoundParams:
    """Sizes and rates for the two-binomial comparison X ~ Bin(K1, p) vs Y ~ Bin(K2, q)."""

    K1: int
    K2: int
    p: float
    q: float

    def __post_init__(self):
        if self.K1 < 0 or self.K2 < 0:
            raise ParameterError("K1 and K2 must be nonnegative integers")
        if int(self.K1) != self.K1 or int(self.K2) != self.K2:
            raise ParameterError("K1 and K2 must be integers")
        if not (0.0 <= self.p <= 1.0 and 0.0 <= self.q <= 1.0):
            raise ParameterError("p and q must lie in [0, 1]")


def gamma_star(alpha: float, beta: float) -> float:
    """Conjectured sampling threshold 2 / (sqrt(alpha) - sqrt(beta))^2."""
    if not (alpha > beta >= 0.0):
        raise ParameterError(f"need alpha > beta >= 0, got alpha={alpha}, beta={beta}")
    return 2.0 / (math.sqrt(alpha) - math.sqrt(beta)) ** 2


def exact_recovery_possible(alpha: float, beta: float, tol: float = 1e-12) -> str:
    """Classify sqrt(alpha) - sqrt(beta) against sqrt(2): BELOW / ABOVE / BOUNDARY."""
    if not (alpha >= beta >= 0.0):
        raise ParameterError(f"need alpha >= beta >= 0, got alpha={alpha}, beta={beta}")
    d = (math.sqrt(alpha) - math.sqrt(beta)) - math.sqrt(2.0)
    if abs(d) <= tol:
        return BOUNDARY
    return ABOVE if d > 0 else BELOW


def lambda_star(p: float, q: float) -> float:
    """Optimal multiplier (p - q) / (log p - log q); invariant to the (alpha, beta, n) form."""
    if not (0.0 < q < p <= 1.0):
        raise ParameterError(f"need 0 < q < p <= 1, got p={p}, q={q}")
    # log(p/q) written as log1p keeps the p -> q+ limit (-> q) well conditioned
    return (p - q) / math.log1p((p - q) / q)


def lemma2_exponent(alpha: float, beta: float, gamma: float) -> float:
    """Rate exponent (alpha + beta) * gamma / 2 - gamma * sqrt(alpha * beta)."""
    if not (alpha > beta >= 0.0):
        raise ParameterError(f"need alpha > beta >= 0, got alpha={alpha}, beta={beta}")
    if gamma < 0:
        raise ParameterError("gamma must be nonnegative")
    return (alpha + beta) * gamma / 2.0 - gamma * math.sqrt(alpha * beta)


def lemma2_bound(bp: BoundParams) -> float:
    """Closed-form tail bound exp(-(K1 p + K2 q - 2 sqrt(K1 K2 p q)))."""
    k1p = bp.K1 * bp.p
    k2q = bp.K2 * bp.q
    if k1p < k2q:
        raise DomainError(f"bound needs K1*p >= K2*q, got {k1p} < {k2q}")
    return math.exp(-(k1p + k2q - 2.0 * math.sqrt(k1p * k2q)))


def _binom_pmf(k_max: int, p: float) -> np.ndarray:
    """pmf of Bin(k_max, p) on 0..k_max, anchored in log space."""
    k = np.arange(k_max + 1, dtype=np.float64)
    logpmf = (gammaln(k_max + 1.0) - gammaln(k + 1.0) - gammaln(k_max - k + 1.0)
              + xlogy(k, p) + xlogy(k_max - k, 1.0 - p))
    return np.exp(logpmf)


def _compensated_cumsum(x: np.ndarray) -> np.ndarray:
    """Neumaier running sums; plain cumsum error would grow with length."""
    out = np.empty_like(x)
    total = 0.0
    comp = 0.0
    for i, v in enumerate(x.tolist()):
        t = total + v
        if abs(total) >= abs(v):
            comp += (total - t) + v
        else:
            comp += (v - t) + total
        total = t
        out[i] = total + comp
    return out


def binom_diff_tail_exact(bp: BoundParams) -> float:
    """P(X - Y <= 0) for X ~ Bin(K1, p), Y ~ Bin(K2, q), by dense convolution."""
    if bp.K1 + bp.K2 > _CONVOLUTION_CAP:
        raise CapacityError(f"K1 + K2 exceeds the dense convolution cap {_CONVOLUTION_CAP}")
    pmf_x = _binom_pmf(bp.K1, bp.p)
    pmf_y = _binom_pmf(bp.K2, bp.q)
    cdf_x = np.minimum(_compensated_cumsum(pmf_x), 1.0)
    j = np.minimum(np.arange(bp.K2 + 1), bp.K1)
    total = math.fsum((pmf_y * cdf_x[j]).tolist())
    return min(max(total, 0.0), 1.0)


def chernoff_grid_min(bp: BoundParams, t_grid=None) -> float:
    """Minimum over a t-grid of the exact-MGF Chernoff bound on P(X - Y <= 0).

    Each valid t >= 0 gives the bound
    exp(K1 * log(1 - p(1 - e^-t)) + K2 * log(1 - q(1 - e^t)));
    grid points with a non-positive log argument or non-finite value are skipped.
    """
    t = _DEFAULT_T_GRID if t_grid is None else np.asarray(t_grid, dtype=np.float64)
    if t.size == 0:
        raise ParameterError("t grid must be non-empty")
    if (t < 0).any():
        raise ParameterError("t grid values must be nonnegative")
    with np.errstate(over="ignore", invalid="ignore"):
        x1 = bp.p * (-np.expm1(-t))          # p (1 - e^-t) in [0, p]
        x2 = bp.q * np.expm1(t)              # -q (1 - e^t) >= 0
        exponent = xlogy(bp.K1, 1.0 - x1)
        if bp.K2:
            exponent = exponent + bp.K2 * np.log1p(x2)
    valid = (x1 < 1.0) & np.isfinite(exponent)
    if not valid.any():
        raise DomainError("no valid grid point for the Chernoff bound")
    return float(np.exp(np.min(exponent[valid])))
