# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: border following and Zhang-Shasha tree distance.

Same signatures and results as ``hovw._kernels_py``.
"""

import numpy as np
cimport numpy as cnp

cnp.import_array()

cdef int _DR[8]
cdef int _DC[8]
_DR[:] = [0, 1, 1, 1, 0, -1, -1, -1]
_DC[:] = [1, 1, 0, -1, -1, -1, 0, 1]


cdef inline int _direction(int dr, int dc):
    cdef int k
    for k in range(8):
        if _DR[k] == dr and _DC[k] == dc:
            return k
    return -1


def trace_outer_border(mask, Py_ssize_t r0, Py_ssize_t c0):
    cdef cnp.uint8_t[:, :] m = np.ascontiguousarray(mask, dtype=np.uint8)
    cdef int k, d, d2, first = -1
    cdef Py_ssize_t r1, c1, r2, c2, r3, c3, r4 = 0, c4 = 0
    cdef Py_ssize_t cap = 64, count = 1
    cdef cnp.int64_t[:, :] out = np.empty((cap, 2), dtype=np.int64)
    out[0, 0] = r0
    out[0, 1] = c0
    for k in range(1, 8):
        d = (4 + k) % 8
        if m[r0 + _DR[d], c0 + _DC[d]]:
            first = d
            break
    if first < 0:
        return np.asarray(out[:1]).copy()
    r1 = r0 + _DR[first]
    c1 = c0 + _DC[first]
    r2 = r1
    c2 = c1
    r3 = r0
    c3 = c0
    while True:
        d2 = _direction(<int>(r2 - r3), <int>(c2 - c3))
        for k in range(8):
            d = (d2 - 1 - k + 16) % 8
            r4 = r3 + _DR[d]
            c4 = c3 + _DC[d]
            if m[r4, c4]:
                break
        if r4 == r0 and c4 == c0 and r3 == r1 and c3 == c1:
            break
        r2 = r3
        c2 = c3
        r3 = r4
        c3 = c4
        if count == cap:
            grown = np.empty((cap * 2, 2), dtype=np.int64)
            grown[:cap] = np.asarray(out)
            out = grown
            cap *= 2
        out[count, 0] = r3
        out[count, 1] = c3
        count += 1
    return np.asarray(out[:count]).copy()


def tree_distance(lmld1, keyroots1, cost1, lmld2, keyroots2, cost2, rename):
    cdef cnp.int64_t[:] l1 = np.ascontiguousarray(lmld1, dtype=np.int64)
    cdef cnp.int64_t[:] l2 = np.ascontiguousarray(lmld2, dtype=np.int64)
    cdef cnp.int64_t[:] kr1 = np.ascontiguousarray(keyroots1, dtype=np.int64)
    cdef cnp.int64_t[:] kr2 = np.ascontiguousarray(keyroots2, dtype=np.int64)
    cdef double[:] c1 = np.ascontiguousarray(cost1, dtype=np.float64)
    cdef double[:] c2 = np.ascontiguousarray(cost2, dtype=np.float64)
    cdef Py_ssize_t n1 = l1.shape[0], n2 = l2.shape[0]
    cdef Py_ssize_t a, b, i, j, li, lj, x, y, px, py, lx, m, n
    cdef double best, t, dx
    cdef double total = 0.0
    if n1 == 0:
        for b in range(n2):
            total += c2[b]
        return total
    if n2 == 0:
        for a in range(n1):
            total += c1[a]
        return total
    cdef double[:, :] ren = np.ascontiguousarray(rename, dtype=np.float64)
    cdef double[:, :] td = np.zeros((n1, n2), dtype=np.float64)
    cdef double[:, :] fd = np.zeros((n1 + 1, n2 + 1), dtype=np.float64)

    for a in range(kr1.shape[0]):
        i = kr1[a]
        li = l1[i]
        for b in range(kr2.shape[0]):
            j = kr2[b]
            lj = l2[j]
            m = i - li + 2
            n = j - lj + 2
            fd[0, 0] = 0.0
            for x in range(1, m):
                fd[x, 0] = fd[x - 1, 0] + c1[li + x - 1]
            for y in range(1, n):
                fd[0, y] = fd[0, y - 1] + c2[lj + y - 1]
            for x in range(1, m):
                px = li + x - 1
                lx = l1[px]
                dx = c1[px]
                for y in range(1, n):
                    py = lj + y - 1
                    best = fd[x - 1, y] + dx
                    t = fd[x, y - 1] + c2[py]
                    if t < best:
                        best = t
                    if lx == li and l2[py] == lj:
                        t = fd[x - 1, y - 1] + ren[px, py]
                        if t < best:
                            best = t
                        fd[x, y] = best
                        td[px, py] = best
                    else:
                        t = fd[lx - li, l2[py] - lj] + td[px, py]
                        if t < best:
                            best = t
                        fd[x, y] = best
    return td[n1 - 1, n2 - 1]
