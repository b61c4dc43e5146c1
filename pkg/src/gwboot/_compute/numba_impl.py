"""numba backend: njit kernels for the hot loops.

Function-for-function mirror of numpy_impl; see hashref for the RNG
addressing contract.  All integer hashing is uint64 with hardware wrapping,
so results are bit-identical to the numpy backend and to hashref.
"""

import math

import numpy as np
from numba import njit, prange

U64_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
U64_MIX_A = np.uint64(0xBF58476D1CE4E5B9)
U64_MIX_B = np.uint64(0x94D049BB133111EB)
U64_TAG_SALT = np.uint64(0x632BE59BD9B4E019)
U64_S30 = np.uint64(30)
U64_S27 = np.uint64(27)
U64_S31 = np.uint64(31)
U64_S11 = np.uint64(11)
U01_SCALE = 2.0 ** -53


@njit(cache=True)
def _mix64(z):
    z = (z ^ (z >> U64_S30)) * U64_MIX_A
    z = (z ^ (z >> U64_S27)) * U64_MIX_B
    return z ^ (z >> U64_S31)


@njit(cache=True)
def _mix2(a, t):
    return _mix64(a ^ (t * U64_GOLDEN + U64_TAG_SALT))


@njit(cache=True)
def _u01(h):
    return np.float64(h >> U64_S11) * U01_SCALE


@njit(cache=True)
def _draw_count(a, cdf, kvals):
    u = _u01(_mix2(a, np.uint64(0)))
    idx = np.searchsorted(cdf, u, side="right")
    if idx >= len(kvals):
        idx = len(kvals) - 1
    return kvals[idx]


@njit(cache=True, nogil=True)
def child_counts_and_addrs(addrs, cdf, kvals):
    n = len(addrs)
    counts = np.empty(n, np.int64)
    total = 0
    for i in range(n):
        counts[i] = _draw_count(addrs[i], cdf, kvals)
        total += counts[i]
    child = np.empty(total, np.uint64)
    pos = 0
    for i in range(n):
        a = addrs[i]
        for j in range(counts[i]):
            child[pos] = _mix2(a, np.uint64(j + 2))
            pos += 1
    return counts, child


@njit(cache=True, nogil=True)
def node_coins(addrs, p):
    n = len(addrs)
    out = np.empty(n, np.bool_)
    for i in range(n):
        out[i] = _u01(_mix2(addrs[i], np.uint64(1))) < p
    return out


@njit(cache=True, nogil=True)
def closure_infect(parent, first_child, n_children, init, r):
    n = len(init)
    infected = init.copy()
    cnt = np.zeros(n, np.int64)
    for v in range(n):
        if infected[v]:
            pv = parent[v]
            if pv >= 0:
                cnt[pv] += 1
            fc = first_child[v]
            for c in range(fc, fc + n_children[v]):
                cnt[c] += 1
    queue = np.empty(n, np.int64)
    qh = 0
    qt = 0
    for v in range(n):
        if not infected[v] and cnt[v] >= r:
            infected[v] = True
            queue[qt] = v
            qt += 1
    while qh < qt:
        v = queue[qh]
        qh += 1
        pv = parent[v]
        if pv >= 0:
            cnt[pv] += 1
            if not infected[pv] and cnt[pv] >= r:
                infected[pv] = True
                queue[qt] = pv
                qt += 1
        fc = first_child[v]
        for c in range(fc, fc + n_children[v]):
            cnt[c] += 1
            if not infected[c] and cnt[c] >= r:
                infected[c] = True
                queue[qt] = c
                qt += 1
    return infected


@njit(cache=True, nogil=True)
def bottom_up_infect(first_child, n_children, depth, init, r):
    # BFS order puts children after parents, so one reverse sweep suffices.
    n = len(init)
    st = init.copy()
    for v in range(n - 1, -1, -1):
        if not st[v] and n_children[v] > 0:
            cnt = 0
            fc = first_child[v]
            for c in range(fc, fc + n_children[v]):
                if st[c]:
                    cnt += 1
            if cnt >= r:
                st[v] = True
    return st


@njit(cache=True, nogil=True)
def mean_kernel_table(kvals, probs, suffix, r, x, break_eps):
    """Average the degree kernel over a finite offspring table at one x.

    Walks k upward from r maintaining the kernel value incrementally through
    its nonnegative decrements; this is cancellation-free and lets the loop
    stop early once the certified remainder (suffix mass times the current,
    monotonically decreasing kernel value) drops below break_eps.

    Returns (value, support points consumed, truncation bound).
    """
    n = len(kvals)
    om = 1.0 - x
    g_r = 0.0
    t = 1.0
    for _ in range(r):
        g_r += t
        t *= om
    om_r = t  # (1 - x)^r
    g = g_r
    dec_sum = 0.0
    dec_c = 0.0
    val = 0.0
    val_c = 0.0
    binom = np.float64(r)  # C(k-1, r-1) at k = r+1
    xpow = 1.0             # x^(k-1-r) at k = r+1
    idx = 0
    terms = 0
    trunc = suffix[n - 1]* g if n > 0 else 0.0
    kmax = kvals[n - 1]
    k = r
    while True:
        if k > r:
            d = binom * xpow * om_r
            y = d - dec_c
            s = dec_sum + y
            dec_c = (s - dec_sum) - y
            dec_sum = s
            g = g_r - dec_sum
            if g < 0.0:
                g = 0.0
            binom = binom * k / (k - r + 1)
            xpow *= x
        if idx < n and kvals[idx] == k:
            pv = probs[idx] * g
            y = pv - val_c
            s = val + y
            val_c = (s - val) - y
            val = s
            rem = suffix[idx]
            idx += 1
            terms += 1
            if rem * g <= break_eps:
                trunc = rem * g
                break
        if k >= kmax:
            trunc = suffix[n - 1] * g
            break
        k += 1
    return val, terms, trunc


@njit(cache=True, parallel=True)
def mean_kernel_grid(kvals, probs, suffix, r, xs, break_eps):
    out = np.empty(len(xs), np.float64)
    for i in prange(len(xs)):
        v, _, _ = mean_kernel_table(kvals, probs, suffix, r, xs[i], break_eps)
        out[i] = v
    return out


@njit(cache=True, nogil=True)
def _map_step(kvals, probs, suffix, r, one_m_p, y, break_eps):
    val, _, _ = mean_kernel_table(kvals, probs, suffix, r, y, break_eps)
    y2 = one_m_p * y * val
    if y2 > one_m_p:
        y2 = one_m_p
    if y2 < 0.0:
        y2 = 0.0
    return y2


@njit(cache=True, nogil=True)
def classify_survival(kvals, probs, suffix, r, p, max_iter, tol, floor, break_eps):
    """Does the monotone recursion y <- (1-p) y K(y) from y = 1-p settle at a
    positive limit?  Returns (survives, last y, iterations).

    Survival is declared only on evidence: either the step drops below tol
    and below 1e-8 * y (a stationary point within float resolution; the
    relative part keeps slow geometric decay toward 0 from counting), or
    some probe point z below the current iterate satisfies map(z) >= z,
    which brackets a fixed point in [z, y] by the intermediate value theorem
    since map(y) < y.  Probes are a geometric ladder hung from the Aitken
    extrapolation of the last three iterates; the ladder matters because the
    plain iteration needs about 30/gap steps near a continuous transition,
    far beyond any fixed budget.  Reaching floor means extinction, and
    exhausting max_iter without evidence of a fixed point is classified
    extinct as well.
    """
    one_m_p = 1.0 - p
    y = one_m_p
    if y <= floor:
        return False, y, 0
    y_prev = -1.0
    y_pprev = -1.0
    for it in range(max_iter):
        y2 = _map_step(kvals, probs, suffix, r, one_m_p, y, break_eps)
        dy = y - y2
        y_pprev = y_prev
        y_prev = y
        y = y2
        if y <= floor:
            return False, y, it + 1
        if -tol <= dy <= tol and dy <= 1e-8 * y:
            return True, y, it + 1
        if it % 8 == 7 and y_pprev > 0.0:
            d1 = y_pprev - y_prev
            d2 = y_prev - y
            denom = d1 - d2
            if d2 > 0.0 and denom > 0.0:
                z = y - d2 * d2 / denom
                cap = y * (1.0 - 1e-9)
                if z > cap:
                    z = cap
                rung = z
                deep = math.sqrt(z * floor) if z > floor else floor
                while rung > floor:
                    if _map_step(kvals, probs, suffix, r, one_m_p, rung,
                                 break_eps) >= rung:
                        return True, rung, it + 1
                    if rung <= deep:
                        break
                    rung *= 1e-2
                    if rung < deep:
                        rung = deep
    return False, y, max_iter


@njit(cache=True)
def _root_infected(rep_key, depth, p, r, cdf, kvals, cap,
                   addr_st, k_st, j_st, s_st):
    """Infected-from-below status of the root, by pruned depth-first descent.

    A node's status is: initially infected, or at least r of its children
    infected from below; truncation-depth nodes have no children.  Subtrees
    that cannot change the verdict are never visited, which leaves every
    other node's draws untouched thanks to address-based RNG.

    Returns (status, nodes visited, ok); ok is False when cap was hit.
    """
    visited = 0
    lvl = 0
    addr = rep_key
    ret = False
    entering = True
    while True:
        if entering:
            visited += 1
            if visited > cap:
                return False, visited, False
            if _u01(_mix2(addr, np.uint64(1))) < p:
                ret = True
                entering = False
            elif lvl == depth:
                ret = False
                entering = False
            else:
                k = _draw_count(addr, cdf, kvals)
                if k <= 0:
                    ret = False
                    entering = False
                else:
                    addr_st[lvl] = addr
                    k_st[lvl] = k
                    j_st[lvl] = 0
                    s_st[lvl] = 0
                    addr = _mix2(addr, np.uint64(2))
                    lvl += 1
        else:
            if lvl == 0:
                return ret, visited, True
            plvl = lvl - 1
            s = s_st[plvl] + (1 if ret else 0)
            j = j_st[plvl] + 1
            k = k_st[plvl]
            if s >= r:
                ret = True
                lvl = plvl
            elif s + (k - j) < r:
                ret = False
                lvl = plvl
            elif j >= k:
                ret = False
                lvl = plvl
            else:
                s_st[plvl] = s
                j_st[plvl] = j
                addr = _mix2(addr_st[plvl], np.uint64(j + 2))
                lvl = plvl + 1
                entering = True


@njit(cache=True, parallel=True)
def estimate_uninfected(cdf, kvals, r, p, depth, reps, base_key, eval_cap):
    """Count replications whose root stays uninfected from below.

    Replication i uses rep_key = mix2(base_key, i); the integer reduction
    makes the count independent of scheduling.  Returns (count, capped).
    """
    uninf = 0
    capped = 0
    for i in prange(reps):
        addr_st = np.empty(depth + 1, np.uint64)
        k_st = np.empty(depth + 1, np.int64)
        j_st = np.empty(depth + 1, np.int64)
        s_st = np.empty(depth + 1, np.int64)
        rep_key = _mix2(base_key, np.uint64(i))
        status, _, ok = _root_infected(rep_key, depth, p, r, cdf, kvals,
                                       eval_cap, addr_st, k_st, j_st, s_st)
        if not ok:
            capped += 1
        if not status:
            uninf += 1
    return uninf, capped
