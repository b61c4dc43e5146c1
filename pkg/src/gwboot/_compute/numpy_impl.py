"""Pure-numpy backend: vectorized fallback for every hot kernel.

Selected with GWBOOT_BACKEND=numpy (or automatically when numba is absent).
Integer hashing runs on uint64 arrays, which wrap silently, so all random
draws are bit-identical to the numba backend; floating-point aggregation may
differ from the numba loops in the last couple of ulps.
"""

import math

import numpy as np

from .hashref import mix2 as _mix2_scalar

_U64_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_U64_MIX_A = np.uint64(0xBF58476D1CE4E5B9)
_U64_MIX_B = np.uint64(0x94D049BB133111EB)
_U64_TAG_SALT = np.uint64(0x632BE59BD9B4E019)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_U01_SCALE = 2.0 ** -53


def _mix64_vec(z):
    # uint64 wraparound is intended; errstate silences the scalar-op warning
    with np.errstate(over="ignore"):
        z = (z ^ (z >> _S30)) * _U64_MIX_A
        z = (z ^ (z >> _S27)) * _U64_MIX_B
        return z ^ (z >> _S31)


def _mix2_vec(a, t):
    with np.errstate(over="ignore"):
        return _mix64_vec(a ^ (t * _U64_GOLDEN + _U64_TAG_SALT))


def _u01_vec(h):
    return (h >> _S11) * _U01_SCALE


def child_counts_and_addrs(addrs, cdf, kvals):
    us = _u01_vec(_mix2_vec(addrs, np.uint64(0)))
    idx = np.minimum(np.searchsorted(cdf, us, side="right"), len(kvals) - 1)
    counts = kvals[idx].astype(np.int64)
    total = int(counts.sum())
    rep_parent = np.repeat(addrs, counts)
    ends = np.cumsum(counts)
    starts = ends - counts
    sib = np.arange(total, dtype=np.uint64) - np.repeat(starts, counts).astype(np.uint64)
    child = _mix2_vec(rep_parent, sib + np.uint64(2))
    return counts, child


def node_coins(addrs, p):
    return _u01_vec(_mix2_vec(addrs, np.uint64(1))) < p


def closure_infect(parent, first_child, n_children, init, r):
    # Synchronous fixed point; on a tree the number of rounds is O(depth).
    n = len(init)
    infected = init.copy()
    while True:
        cnt = np.zeros(n, np.int64)
        if n > 1:
            np.add.at(cnt, parent[1:], infected[1:].astype(np.int64))
            cnt[1:] += infected[parent[1:]]
        fresh = (~infected) & (cnt >= r)
        if not fresh.any():
            return infected
        infected |= fresh


def bottom_up_infect(first_child, n_children, depth, init, r):
    n = len(init)
    st = init.copy()
    if n == 0:
        return st
    max_d = int(depth[-1])
    level_start = np.searchsorted(depth, np.arange(max_d + 2))
    for d in range(max_d - 1, -1, -1):
        lo, hi = level_start[d], level_start[d + 1]
        nodes = np.arange(lo, hi)
        kids = n_children[lo:hi]
        has = kids > 0
        if not has.any():
            continue
        idx = nodes[has]
        seg = np.add.reduceat(st.astype(np.int64), first_child[idx])
        # reduceat runs each segment to the start of the next; segments of
        # consecutive internal nodes are contiguous in BFS order, but the
        # last one would run to the end of the array, so recompute it.
        last = idx[-1]
        seg[-1] = int(st[first_child[last]:first_child[last] + n_children[last]].sum())
        # intermediate segments are exact only when children are contiguous,
        # which BFS ordering guarantees for consecutive internal nodes
        st[idx] |= seg >= r
    return st


def mean_kernel_table(kvals, probs, suffix, r, x, break_eps):
    """Vectorized mirror of the numba walk (no early break)."""
    n = len(kvals)
    om = 1.0 - x
    g_r = 0.0
    t = 1.0
    for _ in range(r):
        g_r += t
        t *= om
    om_r = t
    kmax = int(kvals[-1])
    span = kmax - r
    if span <= 0:
        g_at = np.array([g_r])
    else:
        ms = np.arange(r + 1, kmax, dtype=np.float64)
        binoms = np.empty(span, np.float64)
        binoms[0] = float(r)
        if span > 1:
            binoms[1:] = float(r) * np.cumprod(ms / (ms - (r - 1)))
        with np.errstate(under="ignore"):
            xpows = x ** np.arange(span, dtype=np.float64)
            dec = binoms * xpows * om_r
        g_at = np.empty(span + 1, np.float64)
        g_at[0] = g_r
        g_at[1:] = g_r - np.cumsum(dec)
        np.clip(g_at, 0.0, None, out=g_at)
    g_vals = g_at[kvals - r]
    val = float(np.dot(probs, g_vals))
    trunc = float(suffix[-1] * g_at[-1])
    return val, n, trunc


def mean_kernel_grid(kvals, probs, suffix, r, xs, break_eps):
    out = np.empty(len(xs), np.float64)
    for i, x in enumerate(xs):
        out[i], _, _ = mean_kernel_table(kvals, probs, suffix, r, x, break_eps)
    return out


def _map_step(kvals, probs, suffix, r, one_m_p, y, break_eps):
    val, _, _ = mean_kernel_table(kvals, probs, suffix, r, y, break_eps)
    return min(max(one_m_p * y * val, 0.0), one_m_p)


def classify_survival(kvals, probs, suffix, r, p, max_iter, tol, floor, break_eps):
    # survival only on evidence (stationarity, or a fixed point bracketed by
    # a ladder of probe points); see the numba twin's docstring
    one_m_p = 1.0 - p
    y = one_m_p
    if y <= floor:
        return False, y, 0
    y_prev = -1.0
    y_pprev = -1.0
    for it in range(max_iter):
        y2 = _map_step(kvals, probs, suffix, r, one_m_p, y, break_eps)
        dy = y - y2
        y_pprev, y_prev, y = y_prev, y, y2
        if y <= floor:
            return False, y, it + 1
        if -tol <= dy <= tol and dy <= 1e-8 * y:
            return True, y, it + 1
        if it % 8 == 7 and y_pprev > 0.0:
            d1 = y_pprev - y_prev
            d2 = y_prev - y
            denom = d1 - d2
            if d2 > 0.0 and denom > 0.0:
                z = min(y - d2 * d2 / denom, y * (1.0 - 1e-9))
                rung = z
                deep = math.sqrt(z * floor) if z > floor else floor
                while rung > floor:
                    if _map_step(kvals, probs, suffix, r, one_m_p, rung,
                                 break_eps) >= rung:
                        return True, rung, it + 1
                    if rung <= deep:
                        break
                    rung = max(rung * 1e-2, deep)
    return False, y, max_iter


def estimate_uninfected(cdf, kvals, r, p, depth, reps, base_key, eval_cap):
    """Level-synchronous evaluation of every replication (no pruning).

    Same per-node draws as the numba DFS, so the returned count is
    bit-identical; this path just does strictly more work.
    """
    uninf = 0
    capped = 0
    base = int(base_key)
    for i in range(reps):
        rep_key = np.uint64(_mix2_scalar(base, i))
        addrs = np.array([rep_key], np.uint64)
        levels = [addrs]
        counts_per_level = []
        total = 1
        ok = True
        for _ in range(depth):
            counts, child = child_counts_and_addrs(addrs, cdf, kvals)
            total += len(child)
            if total > eval_cap:
                ok = False
                break
            counts_per_level.append(counts)
            levels.append(child)
            addrs = child
        if not ok:
            capped += 1
            continue
        st = node_coins(levels[-1], p)
        for d in range(len(levels) - 2, -1, -1):
            counts = counts_per_level[d]
            ends = np.cumsum(counts)
            starts = ends - counts
            child_int = st.astype(np.int64)
            seg = np.zeros(len(counts), np.int64)
            nz = counts > 0
            if nz.any():
                red = np.add.reduceat(child_int, starts[nz])
                if len(red) > 0:
                    last_idx = np.flatnonzero(nz)[-1]
                    red[-1] = int(child_int[starts[last_idx]:ends[last_idx]].sum())
                seg[nz] = red
            st = node_coins(levels[d], p) | (seg >= r)
        if not st[0]:
            uninf += 1
    return uninf, capped
