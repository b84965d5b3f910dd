"""Numba kernels for simplex enumeration, union-find, and column reduction."""

import numpy as np
from numba import njit


@njit(cache=True)
def count_triangles(indptr, nbr, limit):
    """Count triangles in the forward-adjacency graph; stop past limit.

    nbr holds, for each vertex, its cap-neighbors with larger index, sorted
    ascending. A triangle (i < j < k) is one common forward neighbor k of
    the edge (i, j); all three pairs are within the cap by construction.
    """
    n = indptr.shape[0] - 1
    cnt = 0
    for i in range(n):
        e_i = indptr[i + 1]
        for a in range(indptr[i], e_i):
            j = nbr[a]
            p = a + 1
            q = indptr[j]
            e_j = indptr[j + 1]
            while p < e_i and q < e_j:
                if nbr[p] < nbr[q]:
                    p += 1
                elif nbr[p] > nbr[q]:
                    q += 1
                else:
                    cnt += 1
                    p += 1
                    q += 1
        if cnt > limit:
            return cnt
    return cnt


@njit(cache=True)
def fill_triangles(indptr, nbr, nbr_rank, dm, out_ijk, out_val, out_faces):
    """Emit triangles in (i, j, k) lex order with diameters and edge ranks.

    nbr_rank carries each adjacency entry's index into the value-sorted
    edge arrays, so out_faces gets the boundary rows for free.
    """
    n = indptr.shape[0] - 1
    m = 0
    for i in range(n):
        e_i = indptr[i + 1]
        for a in range(indptr[i], e_i):
            j = nbr[a]
            d_ij = dm[i, j]
            r_ij = nbr_rank[a]
            p = a + 1
            q = indptr[j]
            e_j = indptr[j + 1]
            while p < e_i and q < e_j:
                if nbr[p] < nbr[q]:
                    p += 1
                elif nbr[p] > nbr[q]:
                    q += 1
                else:
                    k = nbr[p]
                    d_ik = dm[i, k]
                    d_jk = dm[j, k]
                    v = d_ij
                    if d_ik > v:
                        v = d_ik
                    if d_jk > v:
                        v = d_jk
                    out_ijk[m, 0] = i
                    out_ijk[m, 1] = j
                    out_ijk[m, 2] = k
                    out_val[m] = v
                    out_faces[m, 0] = r_ij
                    out_faces[m, 1] = nbr_rank[p]
                    out_faces[m, 2] = nbr_rank[q]
                    m += 1
                    p += 1
                    q += 1
    return m


@njit(cache=True)
def union_find_merges(eu, ev, ew, n_points, full_scan):
    """Process edges in the given order; record merge deaths.

    Returns (deaths, is_merge). With full_scan=False the scan stops once
    all points are connected; is_merge is then only valid up to that edge.
    """
    parent = np.arange(n_points)
    deaths = np.empty(max(n_points - 1, 0), np.float64)
    is_merge = np.zeros(eu.shape[0], np.bool_)
    nm = 0
    for e in range(eu.shape[0]):
        a = eu[e]
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        b = ev[e]
        while parent[b] != b:
            parent[b] = parent[parent[b]]
            b = parent[b]
        if a != b:
            if a < b:
                parent[b] = a
            else:
                parent[a] = b
            deaths[nm] = ew[e]
            is_merge[e] = True
            nm += 1
            if not full_scan and nm == n_points - 1:
                break
    return deaths[:nm], is_merge


@njit(cache=True, inline="always")
def _highest_bit(buf, upper_word):
    """Index of the highest set bit at or below word upper_word, or -1."""
    w = upper_word
    while w >= 0:
        v = buf[w]
        if v != np.uint64(0):
            b = 0
            if v >> np.uint64(32):
                b += 32
                v >>= np.uint64(32)
            if v >> np.uint64(16):
                b += 16
                v >>= np.uint64(16)
            if v >> np.uint64(8):
                b += 8
                v >>= np.uint64(8)
            if v >> np.uint64(4):
                b += 4
                v >>= np.uint64(4)
            if v >> np.uint64(2):
                b += 2
                v >>= np.uint64(2)
            if v >> np.uint64(1):
                b += 1
            return (w << 6) + b
        w -= 1
    return -1


@njit(cache=True)
def reduce_boundary(faces, cleared, n_rows, n_positive_rows):
    """Column reduction of one boundary matrix over GF(2), dense bitsets.

    faces[j] holds the row indices of column j's nonzeros; columns are
    processed in index order (assumed filtration order). Returns pair_row:
    pivot row of column j, -1 for columns reducing to zero, -2 for cleared
    columns. Pivot rows are always positive rows, so once n_positive_rows
    pivots are claimed (when that count is known, else pass -1) every
    remaining column must reduce to zero and the scan stops.
    """
    n_cols = faces.shape[0]
    width = (n_rows + 63) >> 6
    pivot_bits = np.zeros((n_rows, width), np.uint64)
    occupied = np.zeros(n_rows, np.bool_)
    pair_row = np.full(n_cols, -1, np.int64)
    buf = np.zeros(width, np.uint64)
    one = np.uint64(1)
    pairs_found = 0
    for j in range(n_cols):
        if cleared[j]:
            pair_row[j] = -2
            continue
        if n_positive_rows >= 0 and pairs_found >= n_positive_rows:
            break
        for w in range(width):
            buf[w] = np.uint64(0)
        hi = -1
        for t in range(faces.shape[1]):
            r = faces[j, t]
            buf[r >> 6] |= one << np.uint64(r & 63)
            if r > hi:
                hi = r
        low = hi
        while low >= 0:
            if not occupied[low]:
                occupied[low] = True
                for w in range(width):
                    pivot_bits[low, w] = buf[w]
                pair_row[j] = low
                pairs_found += 1
                break
            for w in range(width):
                buf[w] ^= pivot_bits[low, w]
            low = _highest_bit(buf, low >> 6)
    return pair_row
