# cython: boundscheck=False, wraparound=False, initializedcheck=False, cdivision=True
"""Compiled kernels: pruned landmark labeling and the label-join distance.

Mirrors ``_pykernels`` operation for operation, including tie-breaking, so
both backends build bit-identical indexes.
"""

from libc.stdint cimport int64_t
from libcpp.pair cimport pair
from libcpp.queue cimport priority_queue
from libcpp.vector cimport vector

import numpy as np

cimport numpy as cnp

cnp.import_array()

cdef int64_t INF_C = <int64_t>1 << 62

BACKEND_NAME = "compiled"


cdef void _pruned_search(
    const int64_t[::1] indptr,
    const int64_t[::1] heads,
    const int64_t[::1] weights,
    int64_t root,
    vector[vector[int64_t]]& lab_query,
    vector[vector[int64_t]]& lab_target,
    int64_t[::1] tcov,
    int64_t[::1] dist,
    int64_t[::1] parent,
) noexcept:
    cdef vector[int64_t] touched
    cdef priority_queue[pair[int64_t, int64_t]] heap
    cdef pair[int64_t, int64_t] top
    cdef int64_t d, u, v, nd, e, lo, hi, i, nlab, via
    cdef bint covered

    touched.push_back(root)
    dist[root] = 0
    parent[root] = root
    # std::priority_queue is a max-heap; negate both fields so the smallest
    # (distance, vertex) pair pops first, matching the heapq order.
    heap.push(pair[int64_t, int64_t](0, -root))
    while not heap.empty():
        top = heap.top()
        heap.pop()
        d = -top.first
        u = -top.second
        if d > dist[u]:
            continue
        if u != root:
            covered = False
            nlab = <int64_t>lab_query[u].size()
            for i in range(0, nlab, 3):
                via = tcov[lab_query[u][i]]
                if via != INF_C and via + lab_query[u][i + 1] <= d:
                    covered = True
                    break
            if covered:
                continue
        lab_target[u].push_back(root)
        lab_target[u].push_back(d)
        lab_target[u].push_back(parent[u])
        lo = indptr[u]
        hi = indptr[u + 1]
        for e in range(lo, hi):
            v = heads[e]
            nd = d + weights[e]
            if nd < dist[v]:
                if dist[v] == INF_C:
                    touched.push_back(v)
                dist[v] = nd
                parent[v] = u
                heap.push(pair[int64_t, int64_t](-nd, -v))
    for i in range(<int64_t>touched.size()):
        dist[touched[i]] = INF_C


cdef _finalize(vector[vector[int64_t]]& lab, int64_t n):
    cdef cnp.ndarray[cnp.int64_t, ndim=1] out_indptr = np.zeros(n + 1, dtype=np.int64)
    cdef int64_t total = 0, v, m, i, j, pos
    for v in range(n):
        total += <int64_t>lab[v].size() // 3
        out_indptr[v + 1] = total
    cdef cnp.ndarray[cnp.int64_t, ndim=1] hubs = np.empty(total, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] dists = np.empty(total, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] parents = np.empty(total, dtype=np.int64)
    cdef int64_t th, td, tp
    pos = 0
    for v in range(n):
        m = <int64_t>lab[v].size() // 3
        # Insertion sort by hub id; hubs arrive in landmark order and per
        # vertex there are few of them, with unique hub ids.
        for i in range(m):
            th = lab[v][3 * i]
            td = lab[v][3 * i + 1]
            tp = lab[v][3 * i + 2]
            j = i
            while j > 0 and lab[v][3 * (j - 1)] > th:
                lab[v][3 * j] = lab[v][3 * (j - 1)]
                lab[v][3 * j + 1] = lab[v][3 * (j - 1) + 1]
                lab[v][3 * j + 2] = lab[v][3 * (j - 1) + 2]
                j -= 1
            lab[v][3 * j] = th
            lab[v][3 * j + 1] = td
            lab[v][3 * j + 2] = tp
        for i in range(m):
            hubs[pos] = lab[v][3 * i]
            dists[pos] = lab[v][3 * i + 1]
            parents[pos] = lab[v][3 * i + 2]
            pos += 1
    return out_indptr, hubs, dists, parents


def build_label_arrays(n, indptr, heads, weights, rindptr, rheads, rweights, order, undirected):
    cdef int64_t nn = n
    cdef const int64_t[::1] fip = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef const int64_t[::1] fh = np.ascontiguousarray(heads, dtype=np.int64)
    cdef const int64_t[::1] fw = np.ascontiguousarray(weights, dtype=np.int64)
    cdef const int64_t[::1] rip = np.ascontiguousarray(rindptr, dtype=np.int64)
    cdef const int64_t[::1] rh = np.ascontiguousarray(rheads, dtype=np.int64)
    cdef const int64_t[::1] rw = np.ascontiguousarray(rweights, dtype=np.int64)
    cdef const int64_t[::1] ord_v = np.ascontiguousarray(order, dtype=np.int64)
    cdef bint undir = undirected

    cdef vector[vector[int64_t]] lab_in = vector[vector[int64_t]](nn)
    cdef vector[vector[int64_t]] lab_out
    if not undir:
        lab_out = vector[vector[int64_t]](nn)

    cdef int64_t[::1] dist = np.full(nn, INF_C, dtype=np.int64)
    cdef int64_t[::1] parent = np.zeros(nn, dtype=np.int64)
    cdef int64_t[::1] tcov = np.full(nn, INF_C, dtype=np.int64)

    cdef int64_t k, root, i, m
    for k in range(<int64_t>ord_v.shape[0]):
        root = ord_v[k]
        if undir:
            m = <int64_t>lab_in[root].size()
            for i in range(0, m, 3):
                tcov[lab_in[root][i]] = lab_in[root][i + 1]
            _pruned_search(fip, fh, fw, root, lab_in, lab_in, tcov, dist, parent)
            m = <int64_t>lab_in[root].size()
            for i in range(0, m, 3):
                tcov[lab_in[root][i]] = INF_C
        else:
            m = <int64_t>lab_out[root].size()
            for i in range(0, m, 3):
                tcov[lab_out[root][i]] = lab_out[root][i + 1]
            _pruned_search(fip, fh, fw, root, lab_in, lab_in, tcov, dist, parent)
            for i in range(0, m, 3):
                tcov[lab_out[root][i]] = INF_C
            m = <int64_t>lab_in[root].size()
            for i in range(0, m, 3):
                tcov[lab_in[root][i]] = lab_in[root][i + 1]
            _pruned_search(rip, rh, rw, root, lab_out, lab_out, tcov, dist, parent)
            for i in range(0, m, 3):
                tcov[lab_in[root][i]] = INF_C

    fin_in = _finalize(lab_in, nn)
    if undir:
        return fin_in + fin_in
    return fin_in + _finalize(lab_out, nn)


def dist_join(out_indptr, out_hubs, out_dists, in_indptr, in_hubs, in_dists, s, t):
    cdef const int64_t[::1] oip = out_indptr
    cdef const int64_t[::1] oh = out_hubs
    cdef const int64_t[::1] od = out_dists
    cdef const int64_t[::1] iip = in_indptr
    cdef const int64_t[::1] ih = in_hubs
    cdef const int64_t[::1] idd = in_dists
    cdef int64_t i = oip[s]
    cdef int64_t iend = oip[s + 1]
    cdef int64_t j = iip[t]
    cdef int64_t jend = iip[t + 1]
    cdef int64_t best = -1
    cdef int64_t d
    while i < iend and j < jend:
        if oh[i] == ih[j]:
            d = od[i] + idd[j]
            if best < 0 or d < best:
                best = d
            i += 1
            j += 1
        elif oh[i] < ih[j]:
            i += 1
        else:
            j += 1
    return best
