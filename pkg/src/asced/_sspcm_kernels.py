"""Compiled candidate scoring for ssPCM construction.

Rows are multi-word uint64 bitsets with column ``c`` at bit ``c % 64`` of
word ``c // 64``.
"""

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def _popcount(x):
    x = x - ((x >> np.uint64(1)) & np.uint64(0x5555555555555555))
    x = (x & np.uint64(0x3333333333333333)) + ((x >> np.uint64(2)) & np.uint64(0x3333333333333333))
    x = (x + (x >> np.uint64(4))) & np.uint64(0x0F0F0F0F0F0F0F0F)
    return int((x * np.uint64(0x0101010101010101)) >> np.uint64(56))


@njit(cache=True, nogil=True)
def _words_popcount(v):
    c = 0
    for w in range(v.shape[0]):
        c += _popcount(v[w])
    return c


@njit(cache=True, nogil=True)
def _meet_equals(a, b, t):
    for w in range(t.shape[0]):
        if (a[w] & b[w]) != t[w]:
            return False
    return True


@njit(cache=True, nogil=True)
def pcrb_block(rows, alive, a, b, out):
    """Greedy block for the pair ``(alive[a], alive[b])``.

    Starts from the pair and scans the remaining live rows in order, keeping
    a row when its support meets every kept row in exactly ``T``.  Writes
    positions into ``out`` and returns the block size (0 if ``|T| < 2``).
    """
    nw = rows.shape[1]
    ra = rows[alive[a]]
    rb = rows[alive[b]]
    t = ra & rb
    if _words_popcount(t) < 2:
        return 0
    out[0] = a
    out[1] = b
    s = 2
    for k in range(alive.shape[0]):
        if k == a or k == b:
            continue
        rk = rows[alive[k]]
        ok = True
        for q in range(s):
            if not _meet_equals(rk, rows[alive[out[q]]], t):
                ok = False
                break
        if ok:
            out[s] = k
            s += 1
    return s


@njit(cache=True, nogil=True)
def _meet_eq(meet, i, j, k, l):
    # meet[i, j] == meet[k, l]
    for w in range(meet.shape[2]):
        if meet[i, j, w] != meet[k, l, w]:
            return False
    return True


@njit(cache=True, nogil=True)
def group_ends(meet, order):
    """``ends[a, p]``: one past the last position of the group holding ``order[a, p]``."""
    m = order.shape[0]
    ends = np.empty((m, m), dtype=np.int32)
    for a in range(m):
        g0 = 0
        while g0 < m:
            g1 = g0 + 1
            while g1 < m and _meet_eq(meet, a, order[a, g1], a, order[a, g0]):
                g1 += 1
            for p in range(g0, g1):
                ends[a, p] = g1
            g0 = g1
    return ends


@njit(cache=True, nogil=True)
def _group_block(meet, order, live, a, g0, g1, b, out):
    # block seeded by (a, b) from the live members of a's group order[a, g0:g1]
    out[0] = a
    out[1] = b
    s = 2
    for p in range(g0, g1):
        k = order[a, p]
        if k == b or k == a or not live[k]:
            continue
        ok = True
        for q in range(1, s):
            if not _meet_eq(meet, k, out[q], a, b):
                ok = False
                break
        if ok:
            out[s] = k
            s += 1
    return s


@njit(cache=True, nogil=True)
def _lowest(v):
    for w in range(v.shape[0]):
        if v[w] != 0:
            x = v[w]
            bit = 0
            while not (x >> np.uint64(bit)) & np.uint64(1):
                bit += 1
            return w * 64 + bit
    return -1


@njit(cache=True, nogil=True)
def _rank_increment_rows(rows, block, s, basis, pivots, scratch, lows):
    nw = rows.shape[1]
    r = 0
    for q in range(s):
        for w in range(nw):
            scratch[r, w] = rows[block[q], w]
        for p in range(basis.shape[0]):
            pc = pivots[p]
            if (scratch[r, pc >> 6] >> np.uint64(pc & 63)) & np.uint64(1):
                for w in range(nw):
                    scratch[r, w] ^= basis[p, w]
        for p in range(r):
            low = lows[p]
            if (scratch[r, low >> 6] >> np.uint64(low & 63)) & np.uint64(1):
                for w in range(nw):
                    scratch[r, w] ^= scratch[p, w]
        low = _lowest(scratch[r])
        if low >= 0:
            # keep local rows fully reduced so every pivot lives in one row
            for p in range(r):
                if (scratch[p, low >> 6] >> np.uint64(low & 63)) & np.uint64(1):
                    for w in range(nw):
                        scratch[p, w] ^= scratch[r, w]
            lows[r] = low
            r += 1
    return r


@njit(cache=True, nogil=True)
def _cross_and_spread(rows, block, s, meet, a, b, h_orig, colw, n, q, w_new):
    nw = rows.shape[1]
    cyc = 0
    w_new[:] = colw
    for r in range(s + 1):
        for w in range(nw):
            if r < s:
                q[w] = rows[block[r], w] & ~meet[a, b, w]
            else:
                q[w] = meet[a, b, w]
        for h in range(h_orig.shape[0]):
            ov = 0
            for w in range(nw):
                ov += _popcount(h_orig[h, w] & q[w])
            cyc += ov * (ov - 1) // 2
        for c in range(n):
            if (q[c >> 6] >> np.uint64(c & 63)) & np.uint64(1):
                w_new[c] += 1
    tot = 0
    sq = 0
    for c in range(n):
        tot += w_new[c]
        sq += w_new[c] * w_new[c]
    return cyc, n * sq - tot * tot


@njit(cache=True, nogil=True)
def _lex_less(i1, s1, i2, s2):
    return i1 < i2 or (i1 == i2 and s1 < s2)


@njit(cache=True, nogil=True)
def select_pcrb(rows, meet, order, ends, live, basis, pivots, remaining, h_orig, colw, n):
    """Best live pair ``(a, b)`` under the prioritized criteria, or ``(-1, -1)``.

    ``meet[a, b]`` is the support intersection of rows ``a`` and ``b``;
    ``order[a]`` lists all rows sorted by ``meet[a, .]`` with ties in index
    order, so a pair's candidate rows form one contiguous group ending at
    ``ends[a, p]``.  Criteria: larger rank increment, larger block, fewer
    4-cycles against ``h_orig``, smaller ``n * sum(w^2) - (sum w)^2`` of the
    original column weights, then the smallest ``(a, b)``.  The rank
    increment never exceeds ``min(block size, remaining)``, which prunes
    candidates that cannot reach the current best.
    """
    m = rows.shape[0]
    nw = rows.shape[1]
    block = np.empty(m, dtype=np.int64)
    scratch = np.empty((m, nw), dtype=np.uint64)
    lows = np.empty(m, dtype=np.int64)
    q = np.empty(nw, dtype=np.uint64)
    w_new = np.empty(n, dtype=np.int64)
    best_a = -1
    best_b = -1
    best_inc = -1
    best_s = -1
    best_cyc = 0
    best_var = 0
    for a in range(m):
        if not live[a]:
            continue
        g0 = 0
        while g0 < m:
            g1 = ends[a, g0]
            t_pop = 0
            for w in range(nw):
                t_pop += _popcount(meet[a, order[a, g0], w])
            if t_pop < 2:
                g0 = g1
                continue
            n_live = 0
            has_b = False
            for p in range(g0, g1):
                k = order[a, p]
                if live[k] and k != a:
                    n_live += 1
                    if k > a:
                        has_b = True
            ub = n_live + 1
            if not has_b or _lex_less(min(ub, remaining), ub, best_inc, best_s):
                g0 = g1
                continue
            for p in range(g0, g1):
                b = order[a, p]
                if b <= a or not live[b]:
                    continue
                s = _group_block(meet, order, live, a, g0, g1, b, block)
                if _lex_less(min(s, remaining), s, best_inc, best_s):
                    continue
                if remaining > 0:
                    inc = _rank_increment_rows(rows, block, s, basis, pivots, scratch, lows)
                else:
                    inc = 0
                if _lex_less(inc, s, best_inc, best_s):
                    continue
                cyc, var = _cross_and_spread(rows, block, s, meet, a, b, h_orig, colw, n, q, w_new)
                better = inc > best_inc or s > best_s
                if not better:
                    if cyc != best_cyc:
                        better = cyc < best_cyc
                    elif var != best_var:
                        better = var < best_var
                    else:
                        better = a < best_a or (a == best_a and b < best_b)
                if better:
                    best_a = a
                    best_b = b
                    best_inc = inc
                    best_s = s
                    best_cyc = cyc
                    best_var = var
            g0 = g1
    return best_a, best_b


@njit(cache=True, nogil=True)
def block_members(meet, order, ends, live, a, b, out):
    m = order.shape[0]
    g0 = 0
    while g0 < m and not _meet_eq(meet, a, order[a, g0], a, b):
        g0 = ends[a, g0]
    return _group_block(meet, order, live, a, g0, ends[a, g0], b, out)
