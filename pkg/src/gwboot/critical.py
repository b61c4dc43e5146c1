"""Critical probability of the infection process on the random tree.

Two independent routes to the same number:

* maximize the averaged degree kernel over [0, 1]; the critical probability
  is 1 - 1/max (the formula route);
* classify the monotone recursion y <- (1-p) y K(y) as dying out or
  surviving and bisect on p (the dynamical route, see docs/recursion.md).

The agreement of the two routes on the whole corpus is one of the package's
acceptance gates.
"""

import math
from dataclasses import dataclass

import numpy as np

from ._compute import impl
from .errors import DiagnosticError, DomainError
from .kernels import mean_kernel, prepared_table
from .offspring import OffspringDistribution

__all__ = ["CriticalProfile", "RecursionTrace", "maximize_kernel",
           "critical_probability", "recursion_step", "recursion_limit",
           "threshold_by_bisection"]

_GRID_POINTS = 4096
_GOLDEN_XTOL = 1e-12
_INNER_TOL = 1e-14
_EXTINCT_FLOOR = 1e-13  # 10 * inner tolerance
_MAX_FIXED_POINT_ITER = 10 ** 6


@dataclass(frozen=True)
class CriticalProfile:
    """Maximizer data behind one critical probability."""
    max_value: float   # maximum of the averaged kernel, >= 1
    x_star: float      # its (smallest) argmax in [0, 1]
    p_c: float         # 1 - 1/max_value
    tol: float
    degenerate: bool   # mass below the threshold forces p_c = 1
    y_match: float     # y in [0, 1] with 1 + y + ... + y^(r-1) = max_value


@dataclass(frozen=True)
class RecursionTrace:
    p: float
    iterates: np.ndarray
    limit: float
    classified: str    # "extinct" | "survives"
    converged: bool


def maximize_kernel(dist: OffspringDistribution, r: int, tol: float = 1e-10):
    """(max, argmax) of the averaged kernel over [0, 1].

    Dense 4096-point scan (both endpoints included) plus golden-section
    refinement of the bracketing cell down to x-width 1e-12; the kernel is
    evaluated with truncation budget tol/10.  Ties prefer the smaller x.
    """
    if not (tol > 0.0):
        raise DomainError(f"tolerance must be positive, got {tol!r}")
    ks, probs, suffix, r = prepared_table(dist, r, tol / 10.0)
    break_eps = tol / 10.0
    xs = np.linspace(0.0, 1.0, _GRID_POINTS)
    vals = impl.mean_kernel_grid(ks, probs, suffix, r, xs, break_eps)
    i = int(np.argmax(vals))
    best_x, best_v = float(xs[i]), float(vals[i])
    lo = float(xs[i - 1]) if i > 0 else 0.0
    hi = float(xs[i + 1]) if i < len(xs) - 1 else 1.0

    def f(x):
        v, _, _ = impl.mean_kernel_table(ks, probs, suffix, r, x, break_eps)
        return v

    xg, vg = _golden_max(f, lo, hi, _GOLDEN_XTOL)
    if vg > best_v:
        best_x, best_v = xg, vg
    # the averaged kernel equals 1 exactly at x = 1; a stored-table sum can
    # undershoot by its tail bound, never overshoot the true maximum
    if best_v < 1.0:
        best_x, best_v = 1.0, 1.0
    return best_v, best_x


def critical_probability(dist: OffspringDistribution, r: int,
                         tol: float = 1e-10) -> CriticalProfile:
    """Critical initial-infection density for threshold r on the random tree.

    Offspring mass below r makes full infection impossible from any density
    short of 1, so such distributions short-circuit to the degenerate
    profile.
    """
    if int(r) != r or r < 2:
        raise DomainError(f"threshold must be an integer >= 2, got {r!r}")
    r = int(r)
    if dist.min_support < r:
        return CriticalProfile(max_value=math.inf, x_star=math.nan, p_c=1.0,
                               tol=float(tol), degenerate=True, y_match=math.nan)
    max_value, x_star = maximize_kernel(dist, r, tol)
    p_c = 1.0 - 1.0 / max_value
    return CriticalProfile(max_value=max_value, x_star=x_star, p_c=p_c,
                           tol=float(tol), degenerate=False,
                           y_match=_match_geometric_sum(max_value, r))


def recursion_step(dist: OffspringDistribution, r: int, p: float, y: float) -> float:
    """One application of y -> (1-p) * E[P(Bin(count, 1-y) <= r-1)].

    Evaluated as (1-p) * y * mean_kernel(y) for y > 0; at y = 0 the direct
    binomial-tail form gives exactly 0.  Result clamped to [0, 1-p].
    """
    p = _check_unit(p, "p")
    y = _check_unit(y, "y")
    if y == 0.0:
        return 0.0
    value = mean_kernel(dist, r, y).value
    return min(max((1.0 - p) * y * value, 0.0), 1.0 - p)


def recursion_limit(dist: OffspringDistribution, r: int, p: float,
                    max_iter: int = _MAX_FIXED_POINT_ITER,
                    tol: float = _INNER_TOL) -> RecursionTrace:
    """Iterate the recursion from y0 = 1-p and record the trace.

    Stops when the iterate drops below 10*tol (already decided: extinct),
    when a step falls below both tol and 1e-8 times the iterate (a genuine
    fixed point; the relative part keeps slow geometric decay toward 0 from
    reading as convergence above the floor), or at max_iter (reported as
    unconverged, not raised).
    """
    p = _check_unit(p, "p")
    if not (tol > 0.0) or max_iter < 1:
        raise DomainError("max_iter must be >= 1 and tol positive")
    ks, probs, suffix, r = prepared_table(dist, r, 1e-12)
    one_m_p = 1.0 - p
    floor = 10.0 * tol
    y = one_m_p
    iterates = [y]
    converged = False
    for _ in range(max_iter):
        if y <= 0.0:
            converged = True
            break
        value, _, _ = impl.mean_kernel_table(ks, probs, suffix, r, y, 1e-16)
        y_next = min(max(one_m_p * y * value, 0.0), one_m_p)
        dy = y - y_next
        y = y_next
        iterates.append(y)
        if y <= floor or (-tol <= dy <= tol and dy <= 1e-8 * y):
            converged = True
            break
    classified = "extinct" if y <= floor else "survives"
    return RecursionTrace(p=p, iterates=np.array(iterates), limit=y,
                          classified=classified, converged=converged)


def threshold_by_bisection(dist: OffspringDistribution, r: int,
                           tol: float = 1e-7) -> float:
    """Critical density located by bisecting the recursion's classification.

    Independent of the maximization route: uses only the extinct/survives
    verdict of the fixed-point iteration (max_iter 1e6, inner tolerance
    1e-14).  Returns the midpoint of the final bracket of width <= tol.
    """
    if not (tol > 0.0):
        raise DomainError(f"tolerance must be positive, got {tol!r}")
    ks, probs, suffix, r = prepared_table(dist, r, 1e-12)

    def extinct(p):
        survives, _, _ = impl.classify_survival(
            ks, probs, suffix, r, p, _MAX_FIXED_POINT_ITER, _INNER_TOL,
            _EXTINCT_FLOOR, 1e-16)
        return not survives

    if extinct(0.0):
        raise DiagnosticError("recursion classified p = 0 as extinct; "
                              "support >= r should survive at density 0")
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if extinct(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def _match_geometric_sum(target: float, r: int) -> float:
    """Solve 1 + y + ... + y^(r-1) = target on [0, 1] (strictly increasing)."""
    if target >= float(r):
        return 1.0
    lo, hi = 0.0, 1.0
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        s = 0.0
        t = 1.0
        for _ in range(r):
            s += t
            t *= mid
        if s < target:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-12:
            break
    return 0.5 * (lo + hi)


def _golden_max(f, a: float, b: float, xtol: float):
    """Golden-section maximization on [a, b]; ties prefer the smaller x."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    invphi2 = (3.0 - math.sqrt(5.0)) / 2.0
    h = b - a
    if h <= xtol:
        x = 0.5 * (a + b)
        return x, f(x)
    n = max(1, math.ceil(math.log(xtol / h) / math.log(invphi)))
    c = a + invphi2 * h
    d = a + invphi * h
    yc = f(c)
    yd = f(d)
    for _ in range(n - 1):
        if yc >= yd:
            b, d, yd = d, c, yc
            h = invphi * h
            c = a + invphi2 * h
            yc = f(c)
        else:
            a, c, yc = c, d, yd
            h = invphi * h
            d = a + invphi * h
            yd = f(d)
    return (c, yc) if yc >= yd else (d, yd)


def _check_unit(v, name):
    v = float(v)
    if math.isnan(v) or not (0.0 <= v <= 1.0):
        raise DomainError(f"{name} must lie in [0, 1], got {v!r}")
    return v
