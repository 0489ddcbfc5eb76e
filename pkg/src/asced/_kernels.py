"""Compiled flooding BP kernels.

Sign handling is written out explicitly (magnitude first, sign applied
afterwards) so that negating a set of inputs negates the outputs exactly.
The affine-syndrome equivalence tests rely on that bit-exact symmetry.
"""

import math

import numpy as np
from numba import njit

SPA = 0
NSPA = 1
NMSA = 2

TANH_GUARD = 1.0 - 1e-12


@njit(cache=True, nogil=True)
def _clip(x, bound):
    if x > bound:
        return bound
    if x < -bound:
        return -bound
    return x


@njit(cache=True, nogil=True)
def cn_nmsa(incoming, out, alpha, flip, bound):
    d = incoming.shape[0]
    min1 = np.inf
    min2 = np.inf
    argmin = -1
    negative = 0
    for t in range(d):
        v = incoming[t]
        if v < 0.0:
            negative ^= 1
            mag = -v
        else:
            mag = v
        if mag < min1:
            min2 = min1
            min1 = mag
            argmin = t
        elif mag < min2:
            min2 = mag
    for t in range(d):
        mag = min2 if t == argmin else min1
        if mag > bound:
            mag = bound
        neg = negative ^ (1 if incoming[t] < 0.0 else 0) ^ flip
        val = alpha * mag
        out[t] = -val if neg else val


@njit(cache=True, nogil=True)
def cn_nspa(incoming, out, alpha, flip, bound, scratch):
    d = incoming.shape[0]
    # scratch[0, :] holds tanh(|v|/2) with sign, scratch[1, :] prefix products
    for t in range(d):
        v = incoming[t]
        if v < 0.0:
            scratch[0, t] = -math.tanh(-v * 0.5)
        else:
            scratch[0, t] = math.tanh(v * 0.5)
    acc = 1.0
    for t in range(d):
        scratch[1, t] = acc
        acc = acc * scratch[0, t]
    acc = 1.0
    for t in range(d - 1, -1, -1):
        p = scratch[1, t] * acc
        acc = acc * scratch[0, t]
        if p < 0.0:
            mag = -p
            neg = 1
        else:
            mag = p
            neg = 0
        if mag > TANH_GUARD:
            mag = TANH_GUARD
        val = alpha * 2.0 * math.atanh(mag)
        if val > bound:
            val = bound
        out[t] = -val if (neg ^ flip) else val


@njit(cache=True, nogil=True)
def _check(x, ptr, idx, target):
    for j in range(ptr.shape[0] - 1):
        par = target[j]
        for e in range(ptr[j], ptr[j + 1]):
            par ^= x[idx[e]]
        if par:
            return False
    return True


@njit(cache=True, nogil=True)
def bp_decode_batch(cn_ptr, cn_vn, vn_ptr, vn_edge, flips, variant, alpha, max_iters, bound,
                    stop_ptr, stop_idx, stop_target, llr, out_x, out_iters, out_conv):
    """Decode every row of ``llr``; results go to the ``out_*`` arrays."""
    n_frames = llr.shape[0]
    n_vn = llr.shape[1]
    n_cn = cn_ptr.shape[0] - 1
    n_edges = cn_vn.shape[0]
    max_deg = 1
    for j in range(n_cn):
        if cn_ptr[j + 1] - cn_ptr[j] > max_deg:
            max_deg = cn_ptr[j + 1] - cn_ptr[j]
    v2c = np.empty(n_edges)
    c2v = np.empty(n_edges)
    scratch = np.empty((2, max_deg))
    x = np.empty(n_vn, dtype=np.uint8)
    for f in range(n_frames):
        lam = llr[f]
        for e in range(n_edges):
            v2c[e] = _clip(lam[cn_vn[e]], bound)
        for i in range(n_vn):
            x[i] = 1 if lam[i] < 0.0 else 0
        done = _check(x, stop_ptr, stop_idx, stop_target)
        it = 0
        while not done and it < max_iters:
            it += 1
            for j in range(n_cn):
                a = cn_ptr[j]
                b = cn_ptr[j + 1]
                if b == a:
                    continue
                if variant == NMSA:
                    cn_nmsa(v2c[a:b], c2v[a:b], alpha, flips[j], bound)
                else:
                    cn_nspa(v2c[a:b], c2v[a:b], alpha, flips[j], bound, scratch)
            for i in range(n_vn):
                tot = lam[i]
                for q in range(vn_ptr[i], vn_ptr[i + 1]):
                    tot += c2v[vn_edge[q]]
                x[i] = 1 if tot < 0.0 else 0
                for q in range(vn_ptr[i], vn_ptr[i + 1]):
                    e = vn_edge[q]
                    v2c[e] = _clip(tot - c2v[e], bound)
            done = _check(x, stop_ptr, stop_idx, stop_target)
        out_x[f, :] = x
        out_iters[f] = it
        out_conv[f] = done
