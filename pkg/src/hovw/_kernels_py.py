"""Pure-Python versions of the hot kernels.

Mirrors the compiled ``_kernels`` extension function for function; used when
the extension is not built or ``HOVW_PURE_PYTHON`` is set.
"""

import numpy as np

# clockwise as displayed (rows grow downward), starting east
_DR = (0, 1, 1, 1, 0, -1, -1, -1)
_DC = (1, 1, 0, -1, -1, -1, 0, 1)


def _direction(dr, dc):
    for k in range(8):
        if _DR[k] == dr and _DC[k] == dc:
            return k
    raise ValueError("not a neighbour")


def trace_outer_border(mask, r0, c0):
    """Follow the outer border of the 8-connected blob containing (r0, c0).

    (r0, c0) must be the raster-first pixel of the blob and the mask must have
    a zero margin of at least one pixel. Returns an (n, 2) int array of (row,
    col) points, counterclockwise as displayed.
    """
    mask = np.asarray(mask)
    rows = [r0]
    cols = [c0]
    # clockwise search from the west neighbour for the first foreground pixel
    first = -1
    for k in range(1, 8):
        d = (4 + k) % 8
        if mask[r0 + _DR[d], c0 + _DC[d]]:
            first = d
            break
    if first < 0:
        return np.array([[r0, c0]], dtype=np.int64)
    r1, c1 = r0 + _DR[first], c0 + _DC[first]
    r2, c2 = r1, c1
    r3, c3 = r0, c0
    while True:
        d2 = _direction(r2 - r3, c2 - c3)
        for k in range(8):
            d = (d2 - 1 - k) % 8
            r4, c4 = r3 + _DR[d], c3 + _DC[d]
            if mask[r4, c4]:
                break
        if r4 == r0 and c4 == c0 and r3 == r1 and c3 == c1:
            break
        r2, c2 = r3, c3
        r3, c3 = r4, c4
        rows.append(r3)
        cols.append(c3)
    return np.column_stack([np.array(rows, dtype=np.int64), np.array(cols, dtype=np.int64)])


def tree_distance(lmld1, keyroots1, cost1, lmld2, keyroots2, cost2, rename):
    """Zhang-Shasha ordered tree edit distance on postorder-indexed trees.

    ``lmld`` holds the leftmost leaf descendant of every node, ``cost`` the
    delete (tree 1) or insert (tree 2) cost of every node and ``rename`` the
    n1 x n2 relabel cost matrix.
    """
    n1 = len(lmld1)
    n2 = len(lmld2)
    if n1 == 0:
        return float(sum(cost2))
    if n2 == 0:
        return float(sum(cost1))
    lmld1 = [int(v) for v in lmld1]
    lmld2 = [int(v) for v in lmld2]
    cost1 = [float(v) for v in cost1]
    cost2 = [float(v) for v in cost2]
    ren = np.asarray(rename, dtype=np.float64).tolist()
    td = [[0.0] * n2 for _ in range(n1)]
    fd = [[0.0] * (n2 + 1) for _ in range(n1 + 1)]

    for i in keyroots1:
        i = int(i)
        li = lmld1[i]
        for j in keyroots2:
            j = int(j)
            lj = lmld2[j]
            m = i - li + 2
            n = j - lj + 2
            fd[0][0] = 0.0
            for x in range(1, m):
                fd[x][0] = fd[x - 1][0] + cost1[li + x - 1]
            for y in range(1, n):
                fd[0][y] = fd[0][y - 1] + cost2[lj + y - 1]
            for x in range(1, m):
                px = li + x - 1
                lx = lmld1[px]
                row = fd[x]
                prev = fd[x - 1]
                dx = cost1[px]
                for y in range(1, n):
                    py = lj + y - 1
                    a = prev[y] + dx
                    b = row[y - 1] + cost2[py]
                    if lx == li and lmld2[py] == lj:
                        c = prev[y - 1] + ren[px][py]
                        best = a if a < b else b
                        best = best if best < c else c
                        row[y] = best
                        td[px][py] = best
                    else:
                        c = fd[lx - li][lmld2[py] - lj] + td[px][py]
                        best = a if a < b else b
                        row[y] = best if best < c else c
    return td[n1 - 1][n2 - 1]
