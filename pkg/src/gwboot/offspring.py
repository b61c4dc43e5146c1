"""Offspring distributions for the branching process.

A distribution is a finite, sorted table of (k, prob) support points plus a
certified bound on any mass beyond the last stored point.  Infinite-support
families (shifted geometric / shifted Poisson) are stored to a 1e-15 tail at
construction and can extend their own series with certified error when a
moment computation needs more than the stored table.

Support is expected to live in {threshold r, r+1, ...} for the percolation
computations, but the table itself is agnostic.
"""

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import special, stats

from ._compute import mix2, stream_key, u01
from .errors import CapabilityError, ConstructionError, DomainError, ValidationError

__all__ = [
    "OffspringDistribution", "EtaParams", "SeedSpec",
    "make_constant", "make_table", "make_geometric", "make_poisson",
    "make_powerlaw", "make_eta", "make_corpus",
    "moment", "truncate", "sample_offspring",
]

_MASS_TOL = 1e-12
_STORE_TOL = 1e-15
_POWERLAW_DEFAULT_CAP = 100_000


@dataclass(frozen=True, eq=False)
class OffspringDistribution:
    """Finite table of support points with a certified residual tail bound."""
    kind: str
    ks: np.ndarray
    probs: np.ndarray
    tail_bound: float
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        ks = np.asarray(self.ks, dtype=np.int64)
        probs = np.asarray(self.probs, dtype=np.float64)
        if ks.ndim != 1 or probs.shape != ks.shape or len(ks) == 0:
            raise ValidationError("distribution table must be two equal-length 1-d arrays")
        if np.any(np.diff(ks) <= 0):
            raise ValidationError("support points must be strictly increasing")
        if np.any(ks < 0):
            raise ValidationError("support points must be nonnegative integers")
        if np.any(probs < 0) or not np.all(np.isfinite(probs)):
            raise ValidationError("probabilities must be finite and nonnegative")
        if not (self.tail_bound >= 0.0):
            raise ValidationError(f"tail_bound must be >= 0, got {self.tail_bound!r}")
        total = float(probs.sum()) + self.tail_bound
        if not (1.0 - _MASS_TOL <= total <= 1.0 + _MASS_TOL):
            raise ValidationError(f"total mass {total!r} is not 1 within {_MASS_TOL}")
        ks.setflags(write=False)
        probs.setflags(write=False)
        object.__setattr__(self, "ks", ks)
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "tail_bound", float(self.tail_bound))

    @property
    def min_support(self) -> int:
        return int(self.ks[0])

    @property
    def max_stored(self) -> int:
        return int(self.ks[-1])

    @cached_property
    def cdf(self) -> np.ndarray:
        """Cumulative table probabilities renormalized to end exactly at 1."""
        c = np.cumsum(self.probs)
        c /= c[-1]
        c[-1] = 1.0
        c.setflags(write=False)
        return c

    @cached_property
    def suffix_mass(self) -> np.ndarray:
        """suffix_mass[i] = tail_bound + mass strictly after table entry i."""
        incl = np.cumsum(self.probs[::-1])[::-1]
        out = np.empty_like(incl)
        out[:-1] = incl[1:]
        out[-1] = 0.0
        out += self.tail_bound
        out.setflags(write=False)
        return out

    def mean(self) -> float:
        return moment(self, 1.0)


@dataclass(frozen=True)
class EtaParams:
    """Solved parameters of the extremal mean-b distribution (kind 'eta')."""
    r: int
    b: float
    cutoff: int        # last support point of the generic 1/(k(k-1)) range
    extra_mass: float  # mass left over by the telescoping base, (r-1)/cutoff
    split: float       # fraction of extra_mass placed on k = r


@dataclass(frozen=True)
class SeedSpec:
    """Addressable RNG seed: distinct stream_index values give independent
    substreams and regeneration is bit-reproducible."""
    master_seed: int
    stream_index: int = 0

    def key(self) -> int:
        return stream_key(self.master_seed, self.stream_index)


def make_constant(b: int) -> OffspringDistribution:
    """Every vertex gets exactly b children."""
    if int(b) != b or b < 1:
        raise DomainError(f"constant offspring requires integer b >= 1, got {b!r}")
    return OffspringDistribution("constant", np.array([int(b)]), np.array([1.0]),
                                 0.0, {"b": int(b)})


def make_table(entries) -> OffspringDistribution:
    """Explicit finite table; probabilities must already sum to 1 within 1e-9."""
    if len(entries) == 0:
        raise ValidationError("empty table")
    ks = []
    probs = []
    for k, p in entries:
        if int(k) != k or k < 0:
            raise ValidationError(f"support point {k!r} is not a nonnegative integer")
        if not (p >= 0.0) or not math.isfinite(p):
            raise ValidationError(f"probability {p!r} for k={k} is negative or not finite")
        ks.append(int(k))
        probs.append(float(p))
    if len(set(ks)) != len(ks):
        raise ValidationError("duplicate support points in table")
    total = math.fsum(probs)
    if abs(total - 1.0) > 1e-9:
        raise ValidationError(f"table mass {total!r} deviates from 1 by more than 1e-9")
    order = np.argsort(ks)
    ks_arr = np.array(ks, dtype=np.int64)[order]
    probs_arr = np.array(probs, dtype=np.float64)[order] / total
    keep = probs_arr > 0.0
    if not keep.all():
        ks_arr, probs_arr = ks_arr[keep], probs_arr[keep]
    return OffspringDistribution("table", ks_arr, probs_arr, 0.0, {})


def make_geometric(r: int, q: float, store_tol: float = _STORE_TOL) -> OffspringDistribution:
    """P(offspring = r + j) = (1-q) q^j, stored until the inclusive suffix
    mass q^j drops to store_tol."""
    r = _as_threshold(r)
    q = float(q)
    if not (0.0 < q < 1.0):
        raise DomainError(f"geometric ratio must be in (0, 1), got {q!r}")
    jmax = max(1, math.ceil(math.log(store_tol) / math.log(q)))
    j = np.arange(jmax + 1)
    probs = (1.0 - q) * q ** j.astype(np.float64)
    tail = q ** float(jmax + 1)
    return OffspringDistribution("shifted-geometric", r + j, probs, tail,
                                 {"r": r, "q": q})


def make_poisson(r: int, rate: float, store_tol: float = _STORE_TOL) -> OffspringDistribution:
    """Offspring = r + Poisson(rate)."""
    r = _as_threshold(r)
    rate = float(rate)
    if not (rate > 0.0) or not math.isfinite(rate):
        raise DomainError(f"poisson rate must be positive and finite, got {rate!r}")
    jmax = 1
    while stats.poisson.sf(jmax - 1, rate) > store_tol:
        jmax += 1
    j = np.arange(jmax + 1)
    probs = stats.poisson.pmf(j, rate)
    tail = float(stats.poisson.sf(jmax, rate))
    return OffspringDistribution("shifted-poisson", r + j, probs, tail,
                                 {"r": r, "rate": rate})


def make_powerlaw(r: int, beta: float, kmax: int = _POWERLAW_DEFAULT_CAP) -> OffspringDistribution:
    """P(offspring = k) proportional to k^-beta on [r, kmax].

    The hard cap keeps every moment finite; the moment-bound verification
    suites require that.
    """
    r = _as_threshold(r)
    beta = float(beta)
    if not (beta > 1.0):
        raise DomainError(f"power-law exponent must exceed 1, got {beta!r}")
    kmax = int(kmax)
    if kmax < r:
        raise DomainError(f"power-law cap {kmax} below minimum support {r}")
    ks = np.arange(r, kmax + 1, dtype=np.int64)
    w = ks.astype(np.float64) ** (-beta)
    probs = w / w.sum()
    return OffspringDistribution("power-law", ks, probs, 0.0,
                                 {"r": r, "beta": beta, "kmax": kmax})


def _eta_means(r: int, k1):
    # mean of the construction at split 1 (all extra mass on k=r) and split 0
    base = 1.0 + (r - 1.0) * (special.digamma(k1) - special.digamma(r))
    a = (r - 1.0) / k1
    return base + a * r, base + a * (2 * r + 1)


def make_eta(r: int, b: float):
    """Extremal distribution with mean b: mass (r-1)/(k(k-1)) on r < k <= k1,
    remainder split between k = r and k = 2r+1.

    The telescoping base leaves exactly (r-1)/k1 unassigned mass, the mean
    constraint is then linear in the split; k1 is the largest cutoff for
    which the split stays strictly inside (0, 1), found by monotone search.
    Returns (distribution, EtaParams).
    """
    if int(r) != r or r < 3:
        raise ConstructionError(
            f"eta construction requires integer r >= 3 (the k1 bound degenerates "
            f"below that), got {r!r}")
    r = int(r)
    b = float(b)
    kmin = 2 * r + 2
    if not (b > _eta_means(r, kmin)[0]):
        raise ConstructionError(
            f"mean b={b!r} is too small: the construction needs b > "
            f"{_eta_means(r, kmin)[0]:.6g} at the minimal cutoff {kmin}")
    hi = kmin
    while _eta_means(r, hi)[0] < b:
        hi *= 2
    lo = kmin
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if _eta_means(r, mid)[0] < b:
            lo = mid
        else:
            hi = mid
    k1 = lo
    for _ in range(8):
        ks = np.arange(r, k1 + 1, dtype=np.int64)
        base_mean = 1.0 + (r - 1.0) * float(np.sum(1.0 / np.arange(r, k1, dtype=np.float64)))
        a = (r - 1.0) / k1
        w = (b - base_mean) / a
        lam = ((2 * r + 1) - w) / (r + 1)
        if 0.0 < lam < 1.0:
            break
        k1 -= 1
    else:
        raise ConstructionError(f"no cutoff with a valid split found near b={b!r}")
    probs = (r - 1.0) / (ks.astype(np.float64) * (ks.astype(np.float64) - 1.0))
    probs[0] = 1.0 / r + lam * a
    probs[r + 1] = (r - 1.0) / ((2.0 * r + 1.0) * 2.0 * r) + (1.0 - lam) * a
    k1_cap = math.e * (r - 2) * math.exp(b / (r - 1)) - 1.0
    if k1 > k1_cap:
        raise ConstructionError(
            f"solved cutoff {k1} exceeds the admissible bound e(r-2)e^(b/(r-1))-1 "
            f"= {k1_cap:.6g}")
    dist = OffspringDistribution("eta", ks, probs, 0.0,
                                 {"r": r, "b": b, "k1": int(k1), "A": a, "lambda": lam})
    mean = float(np.dot(ks.astype(np.float64), probs))
    if abs(mean - b) > 1e-9 * abs(b):
        raise ConstructionError(f"eta mean {mean!r} misses target {b!r} beyond 1e-9 relative")
    return dist, EtaParams(r=r, b=b, cutoff=int(k1), extra_mass=a, split=lam)


def make_corpus(r: int) -> dict:
    """Named test corpus; every member has minimum support >= r."""
    r = _as_threshold(r)
    corpus = {}
    for b in dict.fromkeys((r, r + 1, 2 * r, 5 * r)):
        corpus[f"constant_b{b}"] = make_constant(b)
    for q in (0.3, 0.7):
        corpus[f"geometric_q{q}"] = make_geometric(r, q)
    for rate in (1.0, 5.0):
        corpus[f"poisson_rate{rate:g}"] = make_poisson(r, rate)
    for beta in dict.fromkeys((2.5, r + 1.5)):
        corpus[f"powerlaw_beta{beta:g}"] = make_powerlaw(r, beta)
    if r >= 3:
        b = 3 * (r - 1)
        corpus[f"eta_b{b}"] = make_eta(r, b)[0]
    return corpus


def moment(dist: OffspringDistribution, s: float, tol: float = 1e-12) -> float:
    """E[offspring^s] with absolute truncation error at most tol.

    Finite tables are summed exactly; stored prefixes of infinite families
    extend their series until a certified geometric tail bound drops below
    tol.  Returns math.inf when the tail certifies divergence.
    """
    s = float(s)
    if not (s > 0.0) or not math.isfinite(s):
        raise DomainError(f"moment order must be positive and finite, got {s!r}")
    if not (tol > 0.0):
        raise DomainError(f"tolerance must be positive, got {tol!r}")
    kf = dist.ks.astype(np.float64)
    base = float(np.dot(kf ** s, dist.probs))
    if dist.tail_bound <= 0.0:
        return base
    kind = dist.kind
    if kind == "shifted-geometric":
        q = dist.params["q"]
        r0 = dist.params["r"]
        k = dist.max_stored + 1
        pk = (1.0 - q) * q ** float(k - r0)
        return base + _extend_series(
            k, pk, s, tol,
            step=lambda k, pk: pk * q,
            ratio=lambda k: q * ((k + 1.0) / k) ** s)
    if kind == "shifted-poisson":
        rate = dist.params["rate"]
        r0 = dist.params["r"]
        k = dist.max_stored + 1
        j = k - r0
        pk = math.exp(-rate + j * math.log(rate) - math.lgamma(j + 1.0))
        return base + _extend_series(
            k, pk, s, tol,
            step=lambda k, pk: pk * rate / (k - r0 + 1.0),
            ratio=lambda k: rate / (k - r0 + 1.0) * ((k + 1.0) / k) ** s)
    if kind == "power-law":
        beta = dist.params["beta"]
        if s >= beta - 1.0:
            return math.inf
        raise CapabilityError("uncapped power-law tables do not carry a tail-moment formula")
    raise CapabilityError(f"no tail-moment bound available for kind {kind!r}")


def _extend_series(k, pk, s, tol, step, ratio):
    """Sum pk * k^s onward until ratio-test remainder <= tol."""
    acc = 0.0
    for _ in range(10_000_000):
        term = pk * float(k) ** s
        acc += term
        rho = ratio(k)
        if rho < 1.0 and term * rho / (1.0 - rho) <= tol:
            return acc
        pk = step(k, pk)
        k += 1
    raise CapabilityError(f"tail-moment extension did not certify tolerance {tol!r}")


def truncate(dist: OffspringDistribution, tol: float) -> OffspringDistribution:
    """Finite-table version of dist with omitted mass at most tol.

    Callers using the result at threshold r should pass their evaluation
    budget divided by r.  Keeps every point whose inclusive suffix mass
    exceeds tol plus the first one at or under it.
    """
    if not (tol > 0.0):
        raise DomainError(f"tolerance must be positive, got {tol!r}")
    if dist.tail_bound <= 0.0:
        return dist
    incl = dist.suffix_mass + dist.probs  # inclusive suffix, tail included
    hits = np.nonzero(incl <= tol)[0]
    if len(hits) == 0:
        if dist.kind == "shifted-geometric":
            return make_geometric(dist.params["r"], dist.params["q"], store_tol=tol)
        if dist.kind == "shifted-poisson":
            return make_poisson(dist.params["r"], dist.params["rate"], store_tol=tol)
        raise CapabilityError(
            f"stored table of kind {dist.kind!r} cannot reach omitted mass {tol!r}")
    cut = int(hits[0])
    new_tail = float(dist.suffix_mass[cut])
    return OffspringDistribution(dist.kind, dist.ks[:cut + 1].copy(),
                                 dist.probs[:cut + 1].copy(), new_tail,
                                 dict(dist.params))


def sample_offspring(dist: OffspringDistribution, seed: SeedSpec) -> int:
    """One draw from the stored table (renormalized), deterministic per seed."""
    u = u01(mix2(seed.key(), 0))
    idx = min(int(np.searchsorted(dist.cdf, u, side="right")), len(dist.ks) - 1)
    return int(dist.ks[idx])


def _as_threshold(r) -> int:
    if int(r) != r or r < 2:
        raise DomainError(f"threshold must be an integer >= 2, got {r!r}")
    return int(r)
