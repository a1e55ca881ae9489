"""Pure-Python twin of the compiled kernels.

Implements the same two hot operations with identical tie-breaking, so the
compiled and interpreted backends produce bit-identical label indexes.  Used
automatically when the extension module is unavailable (or when
``KOSR_FORCE_PURE`` is set).
"""

from __future__ import annotations

from heapq import heappop, heappush

import numpy as np

INF = 1 << 62

BACKEND_NAME = "pure-python"


def _pruned_search(indptr, heads, weights, root, lab_query, lab_target, tcov, dist, parent):
    """One pruned shortest-path search from ``root``.

    Label entries (root, d, parent) are appended to ``lab_target[u]`` for every
    vertex settled without being covered by the already-built index.  ``tcov``
    must hold the root's current query-side label distances (hub -> dist).
    """
    touched = [root]
    dist[root] = 0
    parent[root] = root
    heap = [(0, root)]
    while heap:
        d, u = heappop(heap)
        if d > dist[u]:
            continue
        if u != root:
            covered = False
            lab_u = lab_query[u]
            for i in range(0, len(lab_u), 3):
                via = tcov[lab_u[i]]
                if via != INF and via + lab_u[i + 1] <= d:
                    covered = True
                    break
            if covered:
                continue
        lab_target[u].extend((root, d, parent[u]))
        lo = indptr[u]
        hi = indptr[u + 1]
        for e in range(lo, hi):
            v = heads[e]
            nd = d + weights[e]
            if nd < dist[v]:
                if dist[v] == INF:
                    touched.append(v)
                dist[v] = nd
                parent[v] = u
                heappush(heap, (nd, v))
    for v in touched:
        dist[v] = INF


def build_label_arrays(n, indptr, heads, weights, rindptr, rheads, rweights, order, undirected):
    """Pruned landmark labeling over ``order``.

    Returns CSR triples ``(indptr, hubs, dists, parents)`` for the in-labels
    and the out-labels (the same arrays twice when ``undirected``), each
    vertex's entries sorted by hub id.
    """
    indptr = indptr.tolist()
    heads = heads.tolist()
    weights = weights.tolist()
    rindptr = rindptr.tolist()
    rheads = rheads.tolist()
    rweights = rweights.tolist()

    lab_in: list[list[int]] = [[] for _ in range(n)]
    lab_out: list[list[int]] = [[] for _ in range(n)] if not undirected else lab_in
    dist = [INF] * n
    parent = [0] * n
    tcov = [INF] * n

    for root in order.tolist():
        lab_root_out = lab_out[root]
        for i in range(0, len(lab_root_out), 3):
            tcov[lab_root_out[i]] = lab_root_out[i + 1]
        _pruned_search(indptr, heads, weights, root, lab_in, lab_in, tcov, dist, parent)
        for i in range(0, len(lab_root_out), 3):
            tcov[lab_root_out[i]] = INF
        if undirected:
            continue
        lab_root_in = lab_in[root]
        for i in range(0, len(lab_root_in), 3):
            tcov[lab_root_in[i]] = lab_root_in[i + 1]
        _pruned_search(rindptr, rheads, rweights, root, lab_out, lab_out, tcov, dist, parent)
        for i in range(0, len(lab_root_in), 3):
            tcov[lab_root_in[i]] = INF

    def finalize(lab):
        out_indptr = np.zeros(n + 1, dtype=np.int64)
        total = 0
        for v in range(n):
            total += len(lab[v]) // 3
            out_indptr[v + 1] = total
        hubs = np.empty(total, dtype=np.int64)
        dists = np.empty(total, dtype=np.int64)
        parents = np.empty(total, dtype=np.int64)
        pos = 0
        for v in range(n):
            triples = sorted(
                (lab[v][i], lab[v][i + 1], lab[v][i + 2]) for i in range(0, len(lab[v]), 3)
            )
            for hub, d, p in triples:
                hubs[pos] = hub
                dists[pos] = d
                parents[pos] = p
                pos += 1
        return out_indptr, hubs, dists, parents

    fin_in = finalize(lab_in)
    fin_out = fin_in if undirected else finalize(lab_out)
    return fin_in + fin_out


def dist_join(out_indptr, out_hubs, out_dists, in_indptr, in_hubs, in_dists, s, t):
    """Merge-join of L_out(s) and L_in(t) over hub-sorted entries.

    Returns the least cost, or -1 when the two labels share no hub.
    """
    i = int(out_indptr[s])
    iend = int(out_indptr[s + 1])
    j = int(in_indptr[t])
    jend = int(in_indptr[t + 1])
    best = -1
    while i < iend and j < jend:
        hi = out_hubs[i]
        hj = in_hubs[j]
        if hi == hj:
            d = int(out_dists[i]) + int(in_dists[j])
            if best < 0 or d < best:
                best = d
            i += 1
            j += 1
        elif hi < hj:
            i += 1
        else:
            j += 1
    return best
