"""Degree kernel and its offspring average.

degree_kernel(k, r, x) is the polynomial
    sum_{i=0}^{r-1} C(k, i) x^(k-i-1) (1-x)^i,
equal to P(Bin(k, 1-x) <= r-1) / x away from x = 0; mean_kernel averages it
over an offspring distribution.  The critical probability equals
1 - 1/max of that average over [0, 1], so stability at the x = 0 and x = 1
endpoints matters here.
"""

import math
from dataclasses import dataclass

import numpy as np

from ._compute import impl
from .errors import CapabilityError, DomainError
from .offspring import OffspringDistribution, truncate
from .specfun import log_binomial

__all__ = ["KernelEvaluation", "degree_kernel", "mean_kernel"]

_EXACT_BINOM_MAX_K = 50


@dataclass(frozen=True)
class KernelEvaluation:
    x: float
    value: float
    truncation_error: float
    terms_used: int


def degree_kernel(k: int, r: int, x: float) -> float:
    """Evaluate the degree-k kernel at x via the explicit polynomial form.

    Exact integer binomials up to k = 50, log-space terms beyond; the
    polynomial form stays defined at x = 0 where the probability quotient
    form is 0/0.
    """
    k, r = _check_kr(k, r)
    x = _check_unit(x, "x")
    if k <= _EXACT_BINOM_MAX_K:
        om = 1.0 - x
        return math.fsum(math.comb(k, i) * _pow(x, k - i - 1) * _pow(om, i)
                         for i in range(r))
    if x == 0.0:
        return 0.0  # k - i - 1 > 0 for every retained i once k > r
    if x == 1.0:
        return 1.0
    lx = math.log(x)
    l1x = math.log1p(-x)
    return math.fsum(math.exp(log_binomial(k, i) + (k - i - 1) * lx + i * l1x)
                     for i in range(r))


def mean_kernel(dist: OffspringDistribution, r: int, x: float,
                tol: float = 1e-12) -> KernelEvaluation:
    """Average degree_kernel(k, r, x) over dist with truncation error <= tol."""
    if not (tol > 0.0):
        raise DomainError(f"tolerance must be positive, got {tol!r}")
    x = _check_unit(x, "x")
    ks, probs, suffix, r = prepared_table(dist, r, tol)
    value, terms, trunc = impl.mean_kernel_table(ks, probs, suffix, r, x, tol / 2.0)
    return KernelEvaluation(x=x, value=max(value, 0.0),
                            truncation_error=float(trunc), terms_used=int(terms))


def prepared_table(dist: OffspringDistribution, r: int, tol: float):
    """(ks, probs, suffix, r) ready for the backend walk, tail within budget.

    Rebuilds the table finer when the stored tail bound alone would exceed
    tol/2 (each omitted point contributes at most the degree-r kernel value,
    which is at most r).
    """
    if int(r) != r or r < 2:
        raise DomainError(f"threshold must be an integer >= 2, got {r!r}")
    r = int(r)
    if dist.min_support < r:
        raise DomainError(
            f"distribution has support at {dist.min_support} below threshold {r}")
    if dist.tail_bound * r > tol / 2.0:
        dist = truncate(dist, tol / (2.0 * r))
        if dist.tail_bound * r > tol / 2.0:
            raise CapabilityError(
                f"cannot reach truncation tolerance {tol!r} for kind {dist.kind!r}")
    span = dist.max_stored - r
    if span > 50_000_000:
        raise CapabilityError(
            f"support span {span} too large for the incremental walk")
    return dist.ks, dist.probs, dist.suffix_mass, r


def _check_kr(k, r):
    if int(k) != k or int(r) != r:
        raise DomainError(f"k and r must be integers, got k={k!r}, r={r!r}")
    k, r = int(k), int(r)
    if r < 2:
        raise DomainError(f"threshold must be >= 2, got {r}")
    if k < r:
        raise DomainError(f"degree k={k} below threshold r={r}")
    return k, r


def _check_unit(x, name):
    x = float(x)
    if math.isnan(x) or not (0.0 <= x <= 1.0):
        raise DomainError(f"{name} must lie in [0, 1], got {x!r}")
    return x


def _pow(base: float, exp: int) -> float:
    # 0**0 == 1 by the polynomial convention
    if exp == 0:
        return 1.0
    return base ** exp


def brute_force_max(dist: OffspringDistribution, r: int, n_points: int = 1_000_001):
    """Dense-grid maximum of the mean kernel; an independent cross-check for
    the optimizer (slow, test/diagnostic use)."""
    ks, probs, suffix, r = prepared_table(dist, r, 1e-12)
    xs = np.linspace(0.0, 1.0, n_points)
    vals = impl.mean_kernel_grid(ks, probs, suffix, r, xs, 1e-14)
    i = int(np.argmax(vals))
    return float(vals[i]), float(xs[i])
