"""Offline 2-hop labeling: construction, exact distance queries, and
shortest-path reconstruction through label parents.

Every vertex carries an in-label and an out-label: lists of ``(hub, dist,
parent)`` entries sorted by hub id, satisfying the cover property (for every
reachable pair some hub lies in both endpoint labels on a shortest path).
Construction runs pruned forward/backward searches from vertices in
``landmark_order`` and skips entries already covered by the index built so
far.  Undirected graphs store a single label side.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from . import kernels
from .graph import Graph, GraphFormatError

_LABEL_MAGIC = b"KOSRLBL1"
_LABEL_VERSION = 1
_ENTRY_DTYPE = np.dtype([("hub", "<u4"), ("dist", "<i8"), ("parent", "<u4")])


@dataclass
class LabelIndex:
    """Hub labels in CSR form; entries of vertex ``v`` sit in
    ``hubs[indptr[v]:indptr[v+1]]`` sorted by hub id."""

    vertex_count: int
    in_indptr: np.ndarray
    in_hubs: np.ndarray
    in_dists: np.ndarray
    in_parents: np.ndarray
    out_indptr: np.ndarray
    out_hubs: np.ndarray
    out_dists: np.ndarray
    out_parents: np.ndarray
    landmark_order: np.ndarray
    undirected: bool = False

    def in_entries(self, v: int) -> Iterator[tuple[int, int, int]]:
        lo, hi = int(self.in_indptr[v]), int(self.in_indptr[v + 1])
        return zip(
            self.in_hubs[lo:hi].tolist(),
            self.in_dists[lo:hi].tolist(),
            self.in_parents[lo:hi].tolist(),
        )

    def out_entries(self, v: int) -> Iterator[tuple[int, int, int]]:
        lo, hi = int(self.out_indptr[v]), int(self.out_indptr[v + 1])
        return zip(
            self.out_hubs[lo:hi].tolist(),
            self.out_dists[lo:hi].tolist(),
            self.out_parents[lo:hi].tolist(),
        )

    def out_items(self, v: int) -> list[tuple[int, int]]:
        """(hub, dist) pairs of L_out(v), for nearest-neighbor seeding."""
        lo, hi = int(self.out_indptr[v]), int(self.out_indptr[v + 1])
        return list(zip(self.out_hubs[lo:hi].tolist(), self.out_dists[lo:hi].tolist()))

    def dist(self, s: int, t: int) -> int | None:
        if not (0 <= s < self.vertex_count and 0 <= t < self.vertex_count):
            raise IndexError(f"vertex out of range: {s}, {t}")
        d = kernels.dist_join(
            self.out_indptr, self.out_hubs, self.out_dists,
            self.in_indptr, self.in_hubs, self.in_dists, s, t,
        )
        return None if d < 0 else int(d)

    @property
    def entry_count(self) -> int:
        n_in = int(self.in_indptr[-1])
        return n_in if self.undirected else n_in + int(self.out_indptr[-1])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LabelIndex):
            return NotImplemented
        fields = (
            "in_indptr", "in_hubs", "in_dists", "in_parents",
            "out_indptr", "out_hubs", "out_dists", "out_parents", "landmark_order",
        )
        return (
            self.vertex_count == other.vertex_count
            and self.undirected == other.undirected
            and all(np.array_equal(getattr(self, f), getattr(other, f)) for f in fields)
        )


def default_landmark_order(g: Graph) -> np.ndarray:
    """Vertices by descending total degree, ties by ascending id."""
    deg = np.diff(g.indptr) + np.diff(g.rindptr)
    ids = np.arange(g.vertex_count, dtype=np.int64)
    return np.lexsort((ids, -deg)).astype(np.int64)


def build_labels(g: Graph, landmark_order: Sequence[int] | np.ndarray | None = None) -> LabelIndex:
    order = (
        default_landmark_order(g)
        if landmark_order is None
        else np.asarray(landmark_order, dtype=np.int64)
    )
    arrays = kernels.build_label_arrays(
        g.vertex_count, g.indptr, g.heads, g.weights,
        g.rindptr, g.rheads, g.rweights, order, g.undirected,
    )
    return LabelIndex(g.vertex_count, *arrays, landmark_order=order, undirected=g.undirected)


def dist(idx: LabelIndex, s: int, t: int) -> int | None:
    """Exact shortest-path cost from ``s`` to ``t``; None when unreachable."""
    return idx.dist(s, t)


def _min_join(idx: LabelIndex, s: int, t: int) -> tuple[int, int, int, int] | None:
    """Minimizing hub for (s, t): returns (hub, total, parent_out, parent_in).

    ``parent_out`` is the successor of ``s`` on the stored path s->hub,
    ``parent_in`` the predecessor of ``t`` on the stored path hub->t.
    """
    i, iend = int(idx.out_indptr[s]), int(idx.out_indptr[s + 1])
    j, jend = int(idx.in_indptr[t]), int(idx.in_indptr[t + 1])
    best = None
    while i < iend and j < jend:
        hi, hj = int(idx.out_hubs[i]), int(idx.in_hubs[j])
        if hi == hj:
            total = int(idx.out_dists[i]) + int(idx.in_dists[j])
            if best is None or total < best[1]:
                best = (hi, total, int(idx.out_parents[i]), int(idx.in_parents[j]))
            i += 1
            j += 1
        elif hi < hj:
            i += 1
        else:
            j += 1
    return best


def reconstruct_path(idx: LabelIndex, s: int, t: int) -> list[int] | None:
    """A shortest s->t walk recovered by parent expansion through the
    minimizing hub; None when unreachable."""
    if s == t:
        return [s]
    if _min_join(idx, s, t) is None:
        return None
    path = [s]
    _expand_segment(idx, s, t, path, set())
    return path


def _expand_segment(idx: LabelIndex, s: int, t: int, acc: list[int], active: set) -> None:
    # Appends the vertices of a shortest s->t path, excluding s itself.
    if s == t:
        return
    key = (s, t)
    if key in active:
        raise RuntimeError("cycle while reconstructing a path (zero-weight loop?)")
    active.add(key)
    hub, _, p_out, p_in = _min_join(idx, s, t)
    if hub == t:
        # p_out is one arc beyond s toward t.
        acc.append(p_out)
        _expand_segment(idx, p_out, t, acc, active)
    elif hub == s:
        # p_in is one arc before t.
        _expand_segment(idx, s, p_in, acc, active)
        acc.append(t)
    else:
        _expand_segment(idx, s, hub, acc, active)
        _expand_segment(idx, hub, t, acc, active)
    active.discard(key)


def expand_witness(idx: LabelIndex, witness: Sequence[int]) -> list[int]:
    """Concatenate the shortest sub-routes between consecutive witness
    vertices, deduplicating the junctions."""
    if not witness:
        raise ValueError("empty witness")
    route = [int(witness[0])]
    for a, b in zip(witness, witness[1:]):
        seg = reconstruct_path(idx, int(a), int(b))
        if seg is None:
            raise ValueError(f"witness leg {a}->{b} is unreachable")
        route.extend(seg[1:])
    return route


def path_cost(g: Graph, path: Sequence[int]) -> int | None:
    """Sum of arc weights along ``path``; None if some step is not an arc.
    Parallel arcs contribute their minimum weight."""
    total = 0
    for a, b in zip(path, path[1:]):
        best = None
        for v, w in g.out_edges(int(a)):
            if v == b and (best is None or w < best):
                best = w
        if best is None:
            return None
        total += best
    return total


def _write_side(fh, indptr: np.ndarray, hubs: np.ndarray, dists: np.ndarray, parents: np.ndarray) -> None:
    counts = np.diff(indptr).astype("<u4")
    counts.tofile(fh)
    records = np.empty(hubs.shape[0], dtype=_ENTRY_DTYPE)
    records["hub"] = hubs
    records["dist"] = dists
    records["parent"] = parents
    records.tofile(fh)


def _read_side(fh, n: int):
    counts = np.fromfile(fh, dtype="<u4", count=n).astype(np.int64)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    records = np.fromfile(fh, dtype=_ENTRY_DTYPE, count=int(indptr[-1]))
    return (
        indptr,
        records["hub"].astype(np.int64),
        records["dist"].astype(np.int64),
        records["parent"].astype(np.int64),
    )


def save_labels(idx: LabelIndex, path: str) -> None:
    """Binary layout: header, then per-vertex entry counts followed by
    (hub, dist, parent) triples for the in side and, when directed, the out
    side.  Little-endian, 32-bit ids, 64-bit costs."""
    with open(path, "wb") as fh:
        fh.write(_LABEL_MAGIC)
        fh.write(struct.pack("<IQB", _LABEL_VERSION, idx.vertex_count, int(idx.undirected)))
        idx.landmark_order.astype("<u4").tofile(fh)
        _write_side(fh, idx.in_indptr, idx.in_hubs, idx.in_dists, idx.in_parents)
        if not idx.undirected:
            _write_side(fh, idx.out_indptr, idx.out_hubs, idx.out_dists, idx.out_parents)


def load_labels(path: str) -> LabelIndex:
    with open(path, "rb") as fh:
        if fh.read(8) != _LABEL_MAGIC:
            raise GraphFormatError(f"{path}: not a label index file")
        version, n, undirected = struct.unpack("<IQB", fh.read(13))
        if version != _LABEL_VERSION:
            raise GraphFormatError(f"{path}: unsupported version {version}")
        order = np.fromfile(fh, dtype="<u4", count=n).astype(np.int64)
        side_in = _read_side(fh, n)
        side_out = side_in if undirected else _read_side(fh, n)
    return LabelIndex(int(n), *side_in, *side_out, landmark_order=order, undirected=bool(undirected))
