"""Directed weighted graphs, category membership, and category generators.

Vertex ids are dense integers in ``[0, vertex_count)``.  Input files may name
vertices with arbitrary tokens; :func:`load_graph` renumbers them in first
appearance order and returns the remap table so callers can translate back.
Edge weights are non-negative integers throughout.
"""

from __future__ import annotations

import math
import random
import struct
from dataclasses import dataclass
from typing import IO, Iterable, Iterator

import numpy as np

_GRAPH_MAGIC = b"KOSRGRF1"
_GRAPH_VERSION = 1


class GraphFormatError(ValueError):
    """Malformed edge-list or category record."""


class NegativeWeightError(GraphFormatError):
    """Edge record carrying a negative weight."""


class CategoryError(ValueError):
    """Unknown category or invalid category assignment request."""


def _csr_from_arcs(n: int, tails: np.ndarray, heads: np.ndarray, weights: np.ndarray):
    """Group arcs by tail vertex, keeping the input order within each group."""
    order = np.argsort(tails, kind="stable")
    counts = np.bincount(tails, minlength=n) if tails.size else np.zeros(n, dtype=np.int64)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    return indptr, heads[order], weights[order]


@dataclass
class Graph:
    """Directed weighted graph in CSR form, with the transposed adjacency.

    ``indptr``/``heads``/``weights`` give the forward arcs of each vertex;
    ``rindptr``/``rheads``/``rweights`` the same arc multiset keyed by target.
    ``undirected`` records that the arc set is symmetric by construction,
    which lets the labeling stage store a single label side.
    """

    vertex_count: int
    indptr: np.ndarray
    heads: np.ndarray
    weights: np.ndarray
    rindptr: np.ndarray
    rheads: np.ndarray
    rweights: np.ndarray
    undirected: bool = False

    @property
    def arc_count(self) -> int:
        return int(self.heads.shape[0])

    @classmethod
    def from_arcs(
        cls, vertex_count: int, arcs: Iterable[tuple[int, int, int]], undirected: bool = False
    ) -> "Graph":
        """Build a graph from ``(tail, head, weight)`` triples.

        Parallel arcs are kept; self-loops are dropped (they can never lie on
        a shortest path with non-negative weights).
        """
        kept = [(u, v, w) for u, v, w in arcs if u != v]
        if kept:
            tails = np.array([a[0] for a in kept], dtype=np.int64)
            heads = np.array([a[1] for a in kept], dtype=np.int64)
            weights = np.array([a[2] for a in kept], dtype=np.int64)
        else:
            tails = np.empty(0, dtype=np.int64)
            heads = np.empty(0, dtype=np.int64)
            weights = np.empty(0, dtype=np.int64)
        indptr, h, w = _csr_from_arcs(vertex_count, tails, heads, weights)
        # Derive the transpose from the forward CSR order so that any
        # round-trip that preserves the forward arrays rebuilds it verbatim.
        sorted_tails = np.repeat(np.arange(vertex_count, dtype=np.int64), np.diff(indptr))
        rindptr, rh, rw = _csr_from_arcs(vertex_count, h, sorted_tails, w)
        return cls(vertex_count, indptr, h, w, rindptr, rh, rw, undirected)

    def out_edges(self, u: int) -> Iterator[tuple[int, int]]:
        lo, hi = int(self.indptr[u]), int(self.indptr[u + 1])
        return zip(self.heads[lo:hi].tolist(), self.weights[lo:hi].tolist())

    def in_edges(self, v: int) -> Iterator[tuple[int, int]]:
        lo, hi = int(self.rindptr[v]), int(self.rindptr[v + 1])
        return zip(self.rheads[lo:hi].tolist(), self.rweights[lo:hi].tolist())

    def out_degree(self, u: int) -> int:
        return int(self.indptr[u + 1] - self.indptr[u])

    def arcs(self) -> Iterator[tuple[int, int, int]]:
        for u in range(self.vertex_count):
            for v, w in self.out_edges(u):
                yield u, v, w

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return (
            self.vertex_count == other.vertex_count
            and self.undirected == other.undirected
            and all(
                np.array_equal(getattr(self, f), getattr(other, f))
                for f in ("indptr", "heads", "weights", "rindptr", "rheads", "rweights")
            )
        )


class VertexRemap:
    """Mapping between original vertex labels and the dense ids."""

    def __init__(self, labels: Iterable[str]):
        self.labels: list[str] = list(labels)
        self.index: dict[str, int] = {lab: i for i, lab in enumerate(self.labels)}

    def intern(self, label: str) -> int:
        i = self.index.get(label)
        if i is None:
            i = len(self.labels)
            self.labels.append(label)
            self.index[label] = i
        return i

    def __len__(self) -> int:
        return len(self.labels)


def load_graph(source: IO[str] | Iterable[str], directed: bool = True) -> tuple[Graph, VertexRemap]:
    """Parse a whitespace-separated edge list into a dense graph.

    Accepted records: ``u v w`` and DIMACS arc lines ``a u v w``.  Empty
    lines, lines starting with ``#``, and DIMACS comment/header lines (first
    token exactly ``c`` or ``p``) are ignored; a vertex whose name merely
    begins with those letters still parses.  With ``directed=False`` every
    record is expanded into two arcs.
    """
    remap = VertexRemap(())
    arcs: list[tuple[int, int, int]] = []
    for lineno, raw in enumerate(source, start=1):
        line = raw.strip()
        if not line or line[0] == "#":
            continue
        tokens = line.split()
        if tokens[0] in ("c", "p"):
            continue
        if len(tokens) == 4 and tokens[0] == "a":
            tokens = tokens[1:]
        if len(tokens) != 3:
            raise GraphFormatError(f"line {lineno}: expected 'u v w', got {line!r}")
        try:
            w = int(tokens[2])
        except ValueError:
            raise GraphFormatError(f"line {lineno}: weight {tokens[2]!r} is not an integer") from None
        if w < 0:
            raise NegativeWeightError(f"line {lineno}: negative weight {w}")
        u = remap.intern(tokens[0])
        v = remap.intern(tokens[1])
        arcs.append((u, v, w))
        if not directed:
            arcs.append((v, u, w))
    return Graph.from_arcs(len(remap), arcs, undirected=not directed), remap


def save_graph(g: Graph, path: str) -> None:
    """Write the binary graph format (header plus forward arc arrays)."""
    with open(path, "wb") as fh:
        fh.write(_GRAPH_MAGIC)
        fh.write(struct.pack("<IQQB", _GRAPH_VERSION, g.vertex_count, g.arc_count, int(g.undirected)))
        g.indptr.astype("<i8").tofile(fh)
        g.heads.astype("<i8").tofile(fh)
        g.weights.astype("<i8").tofile(fh)


def load_graph_binary(path: str) -> Graph:
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != _GRAPH_MAGIC:
            raise GraphFormatError(f"{path}: not a graph file")
        version, n, m, undirected = struct.unpack("<IQQB", fh.read(21))
        if version != _GRAPH_VERSION:
            raise GraphFormatError(f"{path}: unsupported version {version}")
        indptr = np.fromfile(fh, dtype="<i8", count=n + 1)
        heads = np.fromfile(fh, dtype="<i8", count=m)
        weights = np.fromfile(fh, dtype="<i8", count=m)
    tails = np.repeat(np.arange(n, dtype=np.int64), np.diff(indptr))
    rindptr, rheads, rweights = _csr_from_arcs(n, heads, tails, weights)
    return Graph(int(n), indptr, heads, weights, rindptr, rheads, rweights, bool(undirected))


@dataclass
class CategoryMap:
    """Category membership in both directions.

    ``members`` holds a sorted, duplicate-free vertex list per category;
    ``vertex_categories`` the inverse.  Mutation goes through
    :meth:`add_member` / :meth:`remove_member` so both views stay in sync.
    """

    categories: list[str]
    members: dict[str, list[int]]
    vertex_categories: list[set[str]]

    @classmethod
    def empty(cls, vertex_count: int, categories: Iterable[str] = ()) -> "CategoryMap":
        cats = list(categories)
        return cls(cats, {c: [] for c in cats}, [set() for _ in range(vertex_count)])

    @classmethod
    def from_pairs(cls, vertex_count: int, pairs: Iterable[tuple[int, str]]) -> "CategoryMap":
        cm = cls.empty(vertex_count)
        for v, c in pairs:
            if c not in cm.members:
                cm.categories.append(c)
                cm.members[c] = []
            cm.add_member(v, c)
        return cm

    def size(self, category: str) -> int:
        try:
            return len(self.members[category])
        except KeyError:
            raise CategoryError(f"unknown category {category!r}") from None

    def add_member(self, v: int, category: str) -> bool:
        """Add ``v`` to the category; returns False if it was already there."""
        if category not in self.members:
            raise CategoryError(f"unknown category {category!r}")
        if category in self.vertex_categories[v]:
            return False
        lst = self.members[category]
        lo, hi = 0, len(lst)
        while lo < hi:
            mid = (lo + hi) // 2
            if lst[mid] < v:
                lo = mid + 1
            else:
                hi = mid
        lst.insert(lo, v)
        self.vertex_categories[v].add(category)
        return True

    def remove_member(self, v: int, category: str) -> bool:
        if category not in self.members:
            raise CategoryError(f"unknown category {category!r}")
        if category not in self.vertex_categories[v]:
            return False
        self.members[category].remove(v)
        self.vertex_categories[v].discard(category)
        return True

    def pairs(self) -> Iterator[tuple[int, str]]:
        for c in self.categories:
            for v in self.members[c]:
                yield v, c


def load_categories(
    source: IO[str] | Iterable[str], remap: VertexRemap, vertex_count: int
) -> CategoryMap:
    """Parse ``v c`` membership lines; a vertex may appear on several lines."""
    pairs: list[tuple[int, str]] = []
    for lineno, raw in enumerate(source, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if len(tokens) != 2:
            raise GraphFormatError(f"line {lineno}: expected 'v c', got {line!r}")
        v = remap.index.get(tokens[0])
        if v is None or v >= vertex_count:
            raise GraphFormatError(f"line {lineno}: unknown vertex {tokens[0]!r}")
        pairs.append((v, tokens[1]))
    return CategoryMap.from_pairs(vertex_count, pairs)


def write_categories(cm: CategoryMap, remap: VertexRemap | None, fh: IO[str]) -> None:
    for v, c in cm.pairs():
        label = remap.labels[v] if remap is not None else str(v)
        fh.write(f"{label} {c}\n")


def assign_uniform_categories(
    g: Graph, num_categories: int, size_per_category: int, seed: int
) -> CategoryMap:
    """Assign ``num_categories`` disjoint categories of exactly
    ``size_per_category`` vertices each, sampled uniformly without replacement.
    """
    need = num_categories * size_per_category
    if need > g.vertex_count:
        raise CategoryError(
            f"{num_categories} categories x {size_per_category} members "
            f"exceed {g.vertex_count} vertices"
        )
    rng = random.Random(seed)
    chosen = rng.sample(range(g.vertex_count), need)
    cm = CategoryMap.empty(g.vertex_count, (str(i) for i in range(num_categories)))
    for i in range(num_categories):
        block = sorted(chosen[i * size_per_category : (i + 1) * size_per_category])
        cm.members[str(i)] = block
        for v in block:
            cm.vertex_categories[v].add(str(i))
    return cm


def zipf_sizes(total: int, num_categories: int, factor_f: float) -> list[int]:
    """Category sizes with a rank-power law: size of rank i proportional to
    i**(-1/f), scaled to sum to ``total`` with every size at least 1.
    Larger ``f`` flattens the distribution.
    """
    if num_categories < 1:
        raise CategoryError("need at least one category")
    if factor_f < 1:
        raise CategoryError("factor f must be >= 1")
    if num_categories > total:
        raise CategoryError("more categories than vertices")
    raw = [(i + 1) ** (-1.0 / factor_f) for i in range(num_categories)]
    scale = total / sum(raw)
    sizes = [max(1, math.floor(r * scale)) for r in raw]
    # Hand out the remainder by largest fractional part, then settle any
    # residue (from the max(1, .) clamps) against the largest categories.
    frac = sorted(
        range(num_categories), key=lambda i: (raw[i] * scale - math.floor(raw[i] * scale), -i), reverse=True
    )
    leftover = total - sum(sizes)
    for i in frac:
        if leftover <= 0:
            break
        sizes[i] += 1
        leftover -= 1
    i = 0
    while leftover < 0:
        if sizes[i % num_categories] > 1:
            sizes[i % num_categories] -= 1
            leftover += 1
        i += 1
    return sizes


def assign_zipf_categories(g: Graph, num_categories: int, factor_f: float, seed: int) -> CategoryMap:
    """Partition all vertices into categories with Zipf-like sizes: a seeded
    shuffle followed by contiguous slicing, so every vertex gets one category.
    """
    sizes = zipf_sizes(g.vertex_count, num_categories, factor_f)
    rng = random.Random(seed)
    vertices = list(range(g.vertex_count))
    rng.shuffle(vertices)
    cm = CategoryMap.empty(g.vertex_count, (str(i) for i in range(num_categories)))
    pos = 0
    for i, size in enumerate(sizes):
        block = sorted(vertices[pos : pos + size])
        pos += size
        cm.members[str(i)] = block
        for v in block:
            cm.vertex_categories[v].add(str(i))
    return cm
