"""Numba kernels for tree generation, decoding and walk accumulation.

These are the only sequential O(V) loops in the package; everything else is
vectorized numpy.  All kernels draw uniforms from a caller-owned
``numpy.random.Generator`` and transform them by exact inverse-CDF maps, so
a given stream state determines every output bit.

Offspring draw transforms (one uniform per vertex):
  geometric_half  z = number of trailing one-bits of floor(u * 2^53),
                  which has exactly P(z = k) = 2^-(k+1) on the uniform grid
  table families  z = searchsorted(cdf, u, right); zeta laws invert their
                  Euler-Maclaurin tail beyond the table
"""

from __future__ import annotations

import numpy as np
from numba import njit

FAMILY_GEOMETRIC = 0
FAMILY_ZETA = 1
FAMILY_TABLE = 2

# status codes for tree generation
OK = 0
HEIGHT_REJECT = 1
CAPPED = 2

_TWO53 = 9007199254740992.0

# trailing-ones count of the low byte
_TRAIL_LUT = np.zeros(256, dtype=np.int64)
for _b in range(256):
    _c = 0
    _x = _b
    while _x & 1:
        _c += 1
        _x >>= 1
    _TRAIL_LUT[_b] = _c
del _b, _c, _x


@njit(cache=True, nogil=True, inline="always")
def _geom_z(u, lut):
    j = np.int64(u * _TWO53)
    z = lut[j & 255]
    if z == 8:
        j >>= 8
        while j & 1:
            z += 1
            j >>= 1
    return z


@njit(cache=True, nogil=True, inline="always")
def _bisect_right(a, v):
    lo = 0
    hi = a.shape[0]
    while lo < hi:
        mid = (lo + hi) >> 1
        if v < a[mid]:
            hi = mid
        else:
            lo = mid + 1
    return lo


@njit(cache=True, nogil=True, inline="always")
def _zeta_tail_nb(K, s):
    return (
        K ** (1.0 - s) / (s - 1.0)
        - 0.5 * K ** (-s)
        + s * K ** (-s - 1.0) / 12.0
        - s * (s + 1.0) * (s + 2.0) * K ** (-s - 3.0) / 720.0
    )


@njit(cache=True, nogil=True)
def _zeta_tail_invert(u, table_size, alpha, zeta_a):
    # smallest k with P(Z <= k) >= u, valid beyond the prefix table
    s = 1.0 + alpha
    lo = table_size - 1
    hi = 2 * lo
    while 1.0 - _zeta_tail_nb(float(hi), s) / zeta_a < u:
        lo = hi
        hi *= 2
    while hi - lo > 1:
        mid = (lo + hi) >> 1
        if 1.0 - _zeta_tail_nb(float(mid), s) / zeta_a >= u:
            hi = mid
        else:
            lo = mid
    return hi


@njit(cache=True, nogil=True, inline="always")
def _draw_z(u, code, cdf, alpha, zeta_a, lut):
    if code == FAMILY_GEOMETRIC:
        return _geom_z(u, lut)
    z = _bisect_right(cdf, u)
    if z >= cdf.shape[0]:
        if code == FAMILY_ZETA:
            return _zeta_tail_invert(u, cdf.shape[0], alpha, zeta_a)
        return cdf.shape[0] - 1  # finite custom pmf: clamp to last atom
    return np.int64(z)


@njit(cache=True, nogil=True)
def gen_tree(rng, cap, height_cap, code, cdf, alpha, zeta_a, lut):
    """Depth-first generation of one tree, fused with decoding.

    height_cap < 0 disables the height rejection.  Returns
    (parent, depth, leaf, status); arrays are only meaningful for OK.
    Consumes one uniform per generated vertex.
    """
    size = 1024
    parent = np.empty(size, np.int64)
    depth = np.empty(size, np.int64)
    leaf = np.zeros(size, np.bool_)
    stack_v = np.empty(64, np.int64)
    stack_r = np.empty(64, np.int64)

    parent[0] = -1
    depth[0] = 0
    z0 = _draw_z(rng.random(), code, cdf, alpha, zeta_a, lut)
    leaf[0] = z0 == 0
    n = 1
    sp = 0
    if z0 > 0:
        stack_v[0] = 0
        stack_r[0] = z0
        sp = 1
    while sp > 0:
        while sp > 0 and stack_r[sp - 1] == 0:
            sp -= 1
        if sp == 0:
            break
        p = stack_v[sp - 1]
        stack_r[sp - 1] -= 1
        if n >= size:
            size *= 2
            np_parent = np.empty(size, np.int64)
            np_depth = np.empty(size, np.int64)
            np_leaf = np.zeros(size, np.bool_)
            np_parent[:n] = parent[:n]
            np_depth[:n] = depth[:n]
            np_leaf[:n] = leaf[:n]
            parent = np_parent
            depth = np_depth
            leaf = np_leaf
        i = n
        parent[i] = p
        d = depth[p] + 1
        depth[i] = d
        if height_cap >= 0 and d >= height_cap:
            return parent[:1], depth[:1], leaf[:1], HEIGHT_REJECT
        z = _draw_z(rng.random(), code, cdf, alpha, zeta_a, lut)
        leaf[i] = z == 0
        n += 1
        if n > cap:
            return parent[:1], depth[:1], leaf[:1], CAPPED
        if z > 0:
            if sp >= stack_v.shape[0]:
                ns = stack_v.shape[0] * 2
                nv = np.empty(ns, np.int64)
                nr = np.empty(ns, np.int64)
                nv[:sp] = stack_v[:sp]
                nr[:sp] = stack_r[:sp]
                stack_v = nv
                stack_r = nr
            stack_v[sp] = i
            stack_r[sp] = z
            sp += 1
    return parent[:n], depth[:n], leaf[:n], OK


@njit(cache=True, nogil=True)
def free_sizes(rng, count, cap, code, cdf, alpha, zeta_a, lut):
    """Sizes of ``count`` independent free trees; -1 marks size > cap.

    Walks the Lukasiewicz path only (no tree is materialized): the size is
    the first hitting time of -1 by the offspring-minus-one partial sums.
    """
    out = np.empty(count, np.int64)
    for t in range(count):
        w = 0
        n = 0
        while True:
            z = _draw_z(rng.random(), code, cdf, alpha, zeta_a, lut)
            n += 1
            w += z - 1
            if w == -1:
                out[t] = n
                break
            if n >= cap:
                out[t] = -1
                break
    return out


@njit(cache=True, nogil=True)
def bridge_reject(rng, n, budget, code, cdf, alpha, zeta_a, lut):
    """Draw n iid offspring counts until they sum to n - 1.

    Returns (attempts, z); attempts is -1 if the budget is exhausted.
    An attempt aborts as soon as the running sum exceeds n - 1.
    """
    out = np.empty(n, np.int64)
    block = 16384
    target = n - 1
    for attempt in range(budget):
        s = 0
        i = 0
        ok = True
        while i < n:
            m = min(block, n - i)
            u = rng.random(m)
            for j in range(m):
                z = _draw_z(u[j], code, cdf, alpha, zeta_a, lut)
                out[i + j] = z
                s += z
                if s > target:
                    ok = False
                    break
            if not ok:
                break
            i += m
        if ok and s == target:
            return attempt + 1, out
    return -1, out


@njit(cache=True, nogil=True)
def decode_path(z):
    """Decode a complete Lukasiewicz increment-plus-one sequence.

    ``z`` holds offspring counts in depth-first preorder.  Returns
    (parent, depth, leaf, ok); ok is False when the partial sums violate
    the first-hit-at-the-end invariant.
    """
    n = z.shape[0]
    parent = np.empty(n, np.int64)
    depth = np.empty(n, np.int64)
    leaf = np.zeros(n, np.bool_)
    if n == 0:
        return parent, depth, leaf, False
    w = 0
    for i in range(n):
        w += z[i] - 1
        if w < 0 and i != n - 1:
            return parent, depth, leaf, False
    if w != -1:
        return parent, depth, leaf, False
    stack_v = np.empty(n + 1, np.int64)
    stack_r = np.empty(n + 1, np.int64)
    parent[0] = -1
    depth[0] = 0
    leaf[0] = z[0] == 0
    stack_v[0] = 0
    stack_r[0] = z[0]
    sp = 1
    for i in range(1, n):
        while stack_r[sp - 1] == 0:
            sp -= 1
        p = stack_v[sp - 1]
        stack_r[sp - 1] -= 1
        parent[i] = p
        depth[i] = depth[p] + 1
        leaf[i] = z[i] == 0
        stack_v[sp] = i
        stack_r[sp] = z[i]
        sp += 1
    return parent, depth, leaf, True


@njit(cache=True, nogil=True)
def walk_maxima(parent, leaf, steps):
    """One pass of S_v = S_parent + X_v; returns the six maxima.

    Maxima over all vertices include the root (S = 0); leaf maxima run over
    leaves; step maxima run over non-root vertices.  Requires size >= 2.
    """
    n = parent.shape[0]
    S = np.empty(n, np.float64)
    S[0] = 0.0
    s_max = 0.0
    sabs_max = 0.0
    sL_max = -np.inf
    sLabs_max = -np.inf
    x_max = -np.inf
    xabs_max = -np.inf
    for i in range(1, n):
        xv = steps[i - 1]
        s = S[parent[i]] + xv
        S[i] = s
        if s > s_max:
            s_max = s
        a = abs(s)
        if a > sabs_max:
            sabs_max = a
        if leaf[i]:
            if s > sL_max:
                sL_max = s
            if a > sLabs_max:
                sLabs_max = a
        if xv > x_max:
            x_max = xv
        ax = abs(xv)
        if ax > xabs_max:
            xabs_max = ax
    return s_max, sL_max, sabs_max, sLabs_max, x_max, xabs_max


@njit(cache=True, nogil=True)
def prefix_sums(parent, steps):
    n = parent.shape[0]
    S = np.empty(n, np.float64)
    S[0] = 0.0
    for i in range(1, n):
        S[i] = S[parent[i]] + steps[i - 1]
    return S


@njit(cache=True, nogil=True)
def trunc_prefix_sums(parent, steps, z):
    """S_v^(z): path sums over steps with |X| <= z."""
    n = parent.shape[0]
    S = np.empty(n, np.float64)
    S[0] = 0.0
    for i in range(1, n):
        xv = steps[i - 1]
        if abs(xv) <= z:
            S[i] = S[parent[i]] + xv
        else:
            S[i] = S[parent[i]]
    return S


@njit(cache=True, nogil=True)
def trunc_absmax(parent, steps, z):
    """max_v |S_v^(z)| without materializing the sums for callers."""
    n = parent.shape[0]
    S = np.empty(n, np.float64)
    S[0] = 0.0
    m = 0.0
    for i in range(1, n):
        xv = steps[i - 1]
        if abs(xv) <= z:
            s = S[parent[i]] + xv
        else:
            s = S[parent[i]]
        S[i] = s
        if abs(s) > m:
            m = abs(s)
    return m


@njit(cache=True, nogil=True)
def chain_exceed_ok(parent, steps, z):
    """True iff no two vertices with |X| > z sit on one root-to-vertex path."""
    n = parent.shape[0]
    cnt = np.zeros(n, np.int64)
    for i in range(1, n):
        c = cnt[parent[i]]
        if abs(steps[i - 1]) > z:
            c += 1
            if c >= 2:
                return False
        cnt[i] = c
    return True


def warmup():
    """Force-compile every kernel on tiny inputs (idempotent)."""
    rng = np.random.Generator(np.random.PCG64(0))
    empty = np.empty(0, np.float64)
    gen_tree(rng, 16, -1, FAMILY_GEOMETRIC, empty, 0.0, 1.0, _TRAIL_LUT)
    gen_tree(rng, 16, 1, FAMILY_GEOMETRIC, empty, 0.0, 1.0, _TRAIL_LUT)
    free_sizes(rng, 2, 64, FAMILY_GEOMETRIC, empty, 0.0, 1.0, _TRAIL_LUT)
    bridge_reject(rng, 3, 1000, FAMILY_GEOMETRIC, empty, 0.0, 1.0, _TRAIL_LUT)
    z = np.array([2, 0, 0], dtype=np.int64)
    parent, depth, leaf, ok = decode_path(z)
    steps = np.array([1.0, -2.0])
    walk_maxima(parent, leaf, steps)
    prefix_sums(parent, steps)
    trunc_prefix_sums(parent, steps, 1.5)
    trunc_absmax(parent, steps, 1.5)
    chain_exceed_ok(parent, steps, 1.5)
