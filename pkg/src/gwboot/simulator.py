"""Monte Carlo oracle: sampled trees, infection closure, root estimates.

Trees are truncated at a fixed depth and stored as flat BFS arrays
(contiguous child ranges), which keeps the bottom-up pass cache-friendly.
Truncation-depth nodes get no children, so they are infected only when
initially infected; the probability that the root stays uninfected from
below then has an exact analytic comparator, the depth-th iterate of the
recursion in the critical module.

estimate_uninfected_root never materializes trees: each replication
evaluates the root's status by a pruned descent over address-derived draws
(see _compute.hashref), which is distributed exactly like sampling the tree
and running the bottom-up pass, and is deterministic per seed regardless of
thread count or backend.  The equivalence is pinned by the root-equivalence
tests in the suite.
"""

import math
from dataclasses import dataclass

import numpy as np

from ._compute import impl
from .errors import DomainError, SizeError, ValidationError
from .offspring import OffspringDistribution, SeedSpec

__all__ = ["SampledTree", "SimConfig", "SimEstimate", "sample_tree",
           "bootstrap_closure", "subtree_infected_bottom_up",
           "estimate_uninfected_root"]

_DEFAULT_NODE_CAP = 10 ** 8


@dataclass(frozen=True, eq=False)
class SampledTree:
    """Flat BFS arrays; children of node v are first_child[v] : first_child[v]
    + n_children[v], the root is node 0 with parent -1."""
    parent: np.ndarray
    first_child: np.ndarray
    n_children: np.ndarray
    depth: np.ndarray

    @property
    def n_nodes(self) -> int:
        return len(self.parent)

    @property
    def truncation_depth(self) -> int:
        return int(self.depth[-1])


@dataclass(frozen=True)
class SimConfig:
    r: int
    p: float
    depth: int
    replications: int
    seed: SeedSpec
    node_cap: int = _DEFAULT_NODE_CAP

    def __post_init__(self):
        if int(self.r) != self.r or self.r < 2:
            raise DomainError(f"threshold must be an integer >= 2, got {self.r!r}")
        if not (0.0 <= self.p <= 1.0):
            raise DomainError(f"infection density must lie in [0, 1], got {self.p!r}")
        if int(self.depth) != self.depth or self.depth < 0:
            raise DomainError(f"depth must be a nonnegative integer, got {self.depth!r}")
        if int(self.replications) != self.replications or self.replications < 1:
            raise DomainError(f"replications must be >= 1, got {self.replications!r}")
        if self.node_cap < 1:
            raise DomainError(f"node_cap must be >= 1, got {self.node_cap!r}")


@dataclass(frozen=True)
class SimEstimate:
    """Monte Carlo estimate of the uninfected-root probability."""
    mean: float
    stderr: float
    n: int
    seed: SeedSpec


def sample_tree(dist: OffspringDistribution, depth: int, seed: SeedSpec,
                node_cap: int = _DEFAULT_NODE_CAP) -> SampledTree:
    """Breadth-first truncated tree; deterministic per seed."""
    if int(depth) != depth or depth < 0:
        raise DomainError(f"depth must be a nonnegative integer, got {depth!r}")
    depth = int(depth)
    addrs = np.array([np.uint64(seed.key())], dtype=np.uint64)
    cdf = dist.cdf
    kvals = dist.ks
    sizes = [1]
    counts_per_level = []
    total = 1
    for _ in range(depth):
        counts, child = impl.child_counts_and_addrs(addrs, cdf, kvals)
        total += len(child)
        if total > node_cap:
            raise SizeError(f"sampled tree exceeds the node cap {node_cap}")
        counts_per_level.append(counts)
        sizes.append(len(child))
        addrs = child
        if len(child) == 0:
            break
    counts_per_level.append(np.zeros(sizes[-1], dtype=np.int64))

    n = sum(sizes)
    parent = np.empty(n, np.int64)
    first_child = np.empty(n, np.int64)
    n_children = np.empty(n, np.int64)
    level = np.empty(n, np.int64)
    parent[0] = -1
    off = 0
    child_off = sizes[0]
    for d, size in enumerate(sizes):
        counts = counts_per_level[d] if d < len(counts_per_level) else np.zeros(size, np.int64)
        ends = np.cumsum(counts)
        first_child[off:off + size] = child_off + (ends - counts)
        n_children[off:off + size] = counts
        level[off:off + size] = d
        if d + 1 < len(sizes):
            parent[child_off:child_off + sizes[d + 1]] = np.repeat(
                np.arange(off, off + size, dtype=np.int64), counts)
        off += size
        child_off += int(ends[-1]) if size else 0
    for arr in (parent, first_child, n_children, level):
        arr.setflags(write=False)
    return SampledTree(parent=parent, first_child=first_child,
                       n_children=n_children, depth=level)


def bootstrap_closure(tree: SampledTree, initially_infected, r: int) -> np.ndarray:
    """Closure of the update rule: a healthy node with at least r infected
    neighbours (parent + children) becomes infected, until a fixed point.

    Worklist algorithm with per-node infected-neighbour counters, O(edges).
    """
    init = _as_mask(tree, initially_infected)
    return impl.closure_infect(tree.parent, tree.first_child, tree.n_children,
                               init, _check_r(r))


def subtree_infected_bottom_up(tree: SampledTree, initially_infected, r: int) -> np.ndarray:
    """One reverse-BFS pass: a node is marked iff initially infected or at
    least r of its children are marked (infection from below)."""
    init = _as_mask(tree, initially_infected)
    return impl.bottom_up_infect(tree.first_child, tree.n_children, tree.depth,
                                 init, _check_r(r))


def estimate_uninfected_root(dist: OffspringDistribution,
                             config: SimConfig) -> SimEstimate:
    """Probability that the root is not infected from below at the
    truncation depth, from config.replications independent replications.

    Replication i draws everything from addresses keyed by
    (config.seed, i); results are bit-identical for a fixed config across
    thread counts and backends.
    """
    base_key = np.uint64(config.seed.key())
    count, capped = impl.estimate_uninfected(
        dist.cdf, dist.ks, config.r, config.p, config.depth,
        config.replications, base_key, config.node_cap)
    if capped:
        raise SizeError(
            f"{capped} replication(s) exceeded the node cap {config.node_cap}")
    mean = count / config.replications
    stderr = math.sqrt(mean * (1.0 - mean) / config.replications)
    return SimEstimate(mean=mean, stderr=stderr, n=config.replications,
                       seed=config.seed)


def _as_mask(tree: SampledTree, infected) -> np.ndarray:
    n = tree.n_nodes
    arr = np.asarray(infected)
    if arr.dtype == np.bool_:
        if arr.shape != (n,):
            raise ValidationError(f"infection mask must have shape ({n},)")
        return arr
    idx = arr.astype(np.int64, casting="safe") if arr.size else np.empty(0, np.int64)
    if idx.size and (idx.min() < 0 or idx.max() >= n):
        raise ValidationError("infected node index out of range")
    mask = np.zeros(n, np.bool_)
    mask[idx] = True
    return mask


def _check_r(r) -> int:
    if int(r) != r or r < 2:
        raise DomainError(f"threshold must be an integer >= 2, got {r!r}")
    return int(r)
