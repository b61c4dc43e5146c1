"""Moment-based lower bounds on the critical probability, with every
constant explicit, plus the integral inequalities that certify them and the
sharpness experiments on the extremal mean-b family.

For exponent alpha in (0, r-1) the bound is
    p_c >= combined_const(r, alpha) * E[offspring^(1+alpha)]^(-1/alpha),
with combined_const assembled from a gamma-ratio factor, a harmonic-sum
factor and their two derived constants; at alpha = r-1 the bound switches
to the r-th moment form (1 - 1/r) ((r-1)! / E[offspring^r])^(1/(r-1)).
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .critical import critical_probability
from .errors import DomainError
from .offspring import OffspringDistribution, make_constant, make_eta, moment
from .specfun import log_beta, log_gamma

__all__ = ["LowerBoundReport", "IntegralCheck", "SweepRow", "SharpnessSweep",
           "moment_lower_bound", "rth_moment_bound", "integral_moment_check",
           "sharpness_sweep", "asymptotic_ratio", "alpha_grid"]

_INTEGER_SHIFT = 1e-6
_INTEGER_SNAP = 1e-12


@dataclass(frozen=True)
class LowerBoundReport:
    """One evaluated lower bound and its constant pipeline.

    alpha_eval records the exponent the constants were evaluated at; it
    differs from alpha only for integer alpha in [1, r-2], which are handled
    at alpha - 1e-6 (the constants there are defined as one-sided limits),
    and everything downstream (moment, bound) uses alpha_eval.
    """
    r: int
    alpha: float
    alpha_eval: float
    alpha_floor: int          # integer part of alpha_eval
    alpha_frac: float         # fractional part of alpha_eval
    gamma_factor: float       # gamma-ratio constant in the integral bound
    harmonic_factor: float    # sum 1/(alpha+1-i), i = 0..alpha_floor+1
    integral_const: float     # (2a(a+1) r gamma_factor)^(-1/a)
    direct_const: float       # (1/(2a(a+1) harmonic_factor))^(1/a)
    combined_const: float     # (r-1)/r * min of the two constants above
    moment_value: float       # E[offspring^(1+alpha_eval)]
    bound: float
    t0: float | None = None   # evaluation point of the r-th moment route


@dataclass(frozen=True)
class IntegralCheck:
    """Quadrature vs closed form for the integral behind the bound, and the
    two-sided inequalities it must satisfy."""
    integral: float
    closed_form: float
    upper: float              # r * gamma_factor * E[offspring^(1+alpha)]
    lower: float | None       # (1/y^alpha) / (2 alpha (alpha+1)), when triggered
    quadrature_error: float
    ok_closed_form: bool
    ok_upper: bool
    ok_lower: bool | None


@dataclass(frozen=True)
class SweepRow:
    b: float
    p_c: float
    bound: float
    moment_root: float        # E[offspring^(1+alpha)]^(1/alpha)
    cutoff: int


@dataclass(frozen=True)
class SharpnessSweep:
    alpha: float
    rows: list
    slope_log_pc: float
    slope_log_moment_root: float


def gamma_factor(r: int, alpha: float) -> float:
    """Gamma(r-1-alpha) / [(r-1)(r-2)...(r-1-floor(alpha)) Gamma(r-1-floor(alpha))]."""
    t = math.floor(alpha)
    log_den = math.fsum(math.log(r - 1.0 - i) for i in range(t + 1))
    return math.exp(log_gamma(r - 1.0 - alpha) - log_gamma(r - 1.0 - t) - log_den)


def harmonic_factor(alpha: float) -> float:
    t = math.floor(alpha)
    return math.fsum(1.0 / (alpha + 1.0 - i) for i in range(t + 2))


def moment_lower_bound(r: int, alpha: float,
                       dist: OffspringDistribution) -> LowerBoundReport:
    """Lower bound on p_c from the (1+alpha)-th offspring moment.

    alpha must lie in (0, r-1]; larger exponents admit no uniform constant
    (the constant-offspring family is the counterexample) and are rejected.
    """
    r = _check_r(r)
    alpha = float(alpha)
    if not (0.0 < alpha <= r - 1.0 + _INTEGER_SNAP) or math.isnan(alpha):
        raise DomainError(
            f"alpha must lie in (0, r-1] = (0, {r - 1}], got {alpha!r}")
    if abs(alpha - (r - 1.0)) <= _INTEGER_SNAP:
        return _endpoint_report(r, dist)
    nearest = round(alpha)
    if abs(alpha - nearest) <= _INTEGER_SNAP and 1 <= nearest <= r - 2:
        alpha_eval = float(nearest) - _INTEGER_SHIFT
    else:
        alpha_eval = alpha
    t = math.floor(alpha_eval)
    eps = alpha_eval - t
    c_gamma = gamma_factor(r, alpha_eval)
    c_harm = harmonic_factor(alpha_eval)
    two_a = 2.0 * alpha_eval * (alpha_eval + 1.0)
    direct_const = (1.0 / (two_a * c_harm)) ** (1.0 / alpha_eval)
    integral_const = (two_a * r * c_gamma) ** (-1.0 / alpha_eval)
    combined = (r - 1.0) / r * min(integral_const, direct_const)
    mom = moment(dist, 1.0 + alpha_eval)
    if not math.isfinite(mom):
        raise DomainError(
            f"E[offspring^{1 + alpha_eval}] is infinite; the bound needs a finite moment")
    bound = combined * mom ** (-1.0 / alpha_eval)
    return LowerBoundReport(
        r=r, alpha=alpha, alpha_eval=alpha_eval, alpha_floor=int(t),
        alpha_frac=eps, gamma_factor=c_gamma, harmonic_factor=c_harm,
        integral_const=integral_const, direct_const=direct_const,
        combined_const=combined, moment_value=mom, bound=bound)


def rth_moment_bound(r: int, dist: OffspringDistribution) -> float:
    """(1 - 1/r) ((r-1)! / E[offspring^r])^(1/(r-1)), the alpha = r-1 bound."""
    r = _check_r(r)
    mom = moment(dist, float(r))
    if not math.isfinite(mom):
        raise DomainError("E[offspring^r] is infinite; the bound needs a finite moment")
    t0 = (math.factorial(r - 1) / mom) ** (1.0 / (r - 1.0))
    return (1.0 - 1.0 / r) * t0


def _endpoint_report(r: int, dist: OffspringDistribution) -> LowerBoundReport:
    mom = moment(dist, float(r))
    if not math.isfinite(mom):
        raise DomainError("E[offspring^r] is infinite; the bound needs a finite moment")
    t0 = (math.factorial(r - 1) / mom) ** (1.0 / (r - 1.0))
    combined = (1.0 - 1.0 / r) * math.factorial(r - 1) ** (1.0 / (r - 1.0))
    return LowerBoundReport(
        r=r, alpha=float(r - 1), alpha_eval=float(r - 1), alpha_floor=r - 1,
        alpha_frac=0.0, gamma_factor=math.nan, harmonic_factor=math.nan,
        integral_const=math.nan, direct_const=math.nan,
        combined_const=combined, moment_value=mom,
        bound=combined * mom ** (-1.0 / (r - 1.0)), t0=t0)


def integral_moment_check(dist: OffspringDistribution, r: int, alpha: float,
                          tol: float = 1e-8) -> IntegralCheck:
    """Cross-check the integral of (degree-r kernel minus averaged kernel)
    over (1-x)^(2+alpha) against its beta-function closed form, and verify
    the two-sided inequalities that drive the moment bound.

    The integrand is assembled from the kernel difference's explicit
    positive-term expansion (no cancellation) and the endpoint power
    singularity is flattened by the substitution u = v^(1/(r-1-alpha)).
    """
    r = _check_r(r)
    alpha = float(alpha)
    if not (0.0 < alpha < r - 1.0):
        raise DomainError(f"alpha must lie in (0, r-1) = (0, {r - 1}), got {alpha!r}")
    if abs(alpha - round(alpha)) <= 1e-9:
        raise DomainError(f"alpha must be non-integer for the integral check, got {alpha!r}")
    if dist.tail_bound > 1e-12:
        raise DomainError("finite support required: truncate the distribution first")
    if dist.min_support < r:
        raise DomainError(
            f"distribution has support at {dist.min_support} below threshold {r}")

    coeffs = _difference_coefficients(dist, r)
    closed_form = math.fsum(
        c * math.exp(log_beta(j + 1.0, r - 1.0 - alpha))
        for j, c in enumerate(coeffs) if c != 0.0)

    gamma_exp = r - 1.0 - alpha
    exps = np.arange(len(coeffs), dtype=np.float64)

    def integrand(v):
        x = 1.0 - v ** (1.0 / gamma_exp)
        with np.errstate(under="ignore"):
            return float(np.dot(coeffs, x ** exps))

    eff_tol = max(tol, 1e-8)
    raw, raw_err = integrate.quad(integrand, 0.0, 1.0,
                                  epsabs=1e-300, epsrel=eff_tol * 1e-2, limit=500)
    integral = raw / gamma_exp
    quad_err = raw_err / gamma_exp

    upper = r * gamma_factor(r, alpha) * moment(dist, 1.0 + alpha)
    scale = max(abs(closed_form), abs(integral), 1e-15)
    ok_closed = abs(integral - closed_form) <= eff_tol * scale
    ok_upper = integral <= upper + quad_err + 1e-12 * max(upper, 1.0)

    profile = critical_probability(dist, r, tol=1e-10)
    y = profile.y_match
    c_harm = harmonic_factor(alpha)
    two_a = 2.0 * alpha * (alpha + 1.0)
    lower = None
    ok_lower = None
    if y > 0.0 and y ** alpha < 1.0 / (two_a * c_harm):
        lower = (1.0 / y ** alpha) / two_a
        ok_lower = integral >= lower - quad_err - 1e-12 * max(lower, 1.0)
    return IntegralCheck(integral=integral, closed_form=closed_form,
                         upper=upper, lower=lower, quadrature_error=quad_err,
                         ok_closed_form=ok_closed, ok_upper=ok_upper,
                         ok_lower=ok_lower)


def _difference_coefficients(dist: OffspringDistribution, r: int) -> np.ndarray:
    """Coefficients c_j = C(r+j, r-1) P(offspring > r+j), so that
    (degree-r kernel - averaged kernel)(x) = (1-x)^r sum_j c_j x^j."""
    kmax = dist.max_stored
    if kmax <= r:
        return np.zeros(1)
    i = np.arange(r, kmax, dtype=np.float64)
    binom = np.ones_like(i)
    for j in range(r - 1):
        binom *= (i - j) / (r - 1.0 - j)
    pos = np.searchsorted(dist.ks, np.arange(r, kmax), side="right")
    incl_suffix = np.concatenate([np.cumsum(dist.probs[::-1])[::-1], [0.0]])
    q = incl_suffix[pos] + dist.tail_bound
    return binom * q


def sharpness_sweep(r: int, b_values, alpha: float) -> SharpnessSweep:
    """Critical probability, moment bound and moment growth across the
    extremal mean-b family, with least-squares slopes of the log trends."""
    r = _check_r(r)
    if r < 3:
        raise DomainError("the extremal family needs r >= 3")
    alpha = float(alpha)
    bs = [float(b) for b in b_values]
    if len(bs) < 2:
        raise DomainError("need at least two mean values to fit a slope")
    rows = []
    for b in bs:
        dist, params = make_eta(r, b)
        profile = critical_probability(dist, r, tol=1e-10)
        report = moment_lower_bound(r, alpha, dist)
        mroot = moment(dist, 1.0 + alpha) ** (1.0 / alpha)
        rows.append(SweepRow(b=b, p_c=profile.p_c, bound=report.bound,
                             moment_root=mroot, cutoff=params.cutoff))
    barr = np.array(bs)
    slope_pc = float(np.polyfit(barr, np.log([row.p_c for row in rows]), 1)[0])
    slope_m = float(np.polyfit(barr, np.log([row.moment_root for row in rows]), 1)[0])
    return SharpnessSweep(alpha=alpha, rows=rows, slope_log_pc=slope_pc,
                          slope_log_moment_root=slope_m)


def asymptotic_ratio(r: int, b: int) -> float:
    """p_c for constant offspring b divided by the r-th moment bound
    evaluated at E[offspring^r] = b^r; tends to 1 from above as b grows."""
    r = _check_r(r)
    if int(b) != b or b < r:
        raise DomainError(f"constant offspring needs integer b >= r, got {b!r}")
    p_c = critical_probability(make_constant(int(b)), r, tol=1e-10).p_c
    base = (1.0 - 1.0 / r) * (math.factorial(r - 1) / float(b) ** r) ** (1.0 / (r - 1.0))
    return p_c / base


def alpha_grid(r: int):
    """Verification grid: quarter points, the integers, and the endpoint."""
    r = _check_r(r)
    grid = {0.25, 0.5, 0.75}
    grid.update(float(n) for n in range(1, r))
    return sorted(grid)


def _check_r(r) -> int:
    if int(r) != r or r < 2:
        raise DomainError(f"threshold must be an integer >= 2, got {r!r}")
    return int(r)
