"""Reference fixtures and random instance generation for tests and benchmarks."""

from __future__ import annotations

import random
from dataclasses import dataclass

import numpy as np

from .graph import CategoryMap, Graph
from .labels import LabelIndex

FIG1_LABELS = ("s", "a", "b", "c", "d", "e", "f", "t")
S, A, B, C, D, E, F, T = range(8)

# Pairwise shortest-path costs of the eight-vertex road-network example,
# row = origin, column = destination, vertex order as in FIG1_LABELS.
# Used as arc weights of a complete graph: since the matrix obeys the
# triangle inequality, shortest distances in the fixture equal its arcs.
FIG1_DIST = (
    (0, 8, 13, 10, 13, 14, 24, 17),
    (10, 0, 5, 20, 8, 6, 16, 12),
    (5, 13, 0, 15, 3, 17, 27, 7),
    (10, 18, 5, 0, 3, 17, 27, 7),
    (29, 37, 24, 19, 0, 14, 24, 4),
    (32, 40, 27, 22, 3, 0, 10, 7),
    (28, 36, 23, 18, 16, 13, 0, 3),
    (25, 33, 20, 15, 13, 10, 20, 0),
)

FIG1_CATEGORIES = {"MA": (A, C), "RE": (B, E), "CI": (D, F)}


def fixture_fig1() -> tuple[Graph, CategoryMap]:
    """Complete directed graph over {s,a,b,c,d,e,f,t} whose arc weights are
    the example's pairwise shortest distances, with the three point-of-
    interest categories MA={a,c}, RE={b,e}, CI={d,f}."""
    arcs = [
        (u, v, FIG1_DIST[u][v])
        for u in range(8)
        for v in range(8)
        if u != v
    ]
    g = Graph.from_arcs(8, arcs, undirected=False)
    cm = CategoryMap.empty(8, FIG1_CATEGORIES)
    for c, members in FIG1_CATEGORIES.items():
        for v in members:
            cm.add_member(v, c)
    return g, cm


# One concrete hub labeling of the fixture, the one the worked inverted-index
# examples are stated against.  Entries are (hub, dist) per vertex; parents
# are the hubs themselves, valid because in the distance-closure graph every
# direct arc is itself a shortest path.
_FIG1_L_IN = (
    ((S, 0), (T, 25)),
    ((A, 0), (S, 8), (T, 33)),
    ((B, 0), (S, 13), (T, 20)),
    ((C, 0), (S, 10), (T, 15)),
    ((B, 3), (D, 0), (E, 3), (S, 13), (T, 13)),
    ((E, 0), (S, 14), (T, 10)),
    ((E, 10), (F, 0), (S, 24), (T, 20)),
    ((T, 0),),
)
_FIG1_L_OUT = (
    ((S, 0), (T, 17)),
    ((A, 0), (B, 5), (E, 6), (S, 10), (T, 12)),
    ((B, 0), (S, 5), (T, 7)),
    ((B, 5), (C, 0), (D, 3), (S, 10), (T, 7)),
    ((D, 0), (T, 4)),
    ((E, 0), (T, 7)),
    ((F, 0), (T, 3)),
    ((T, 0),),
)


def _csr_side(per_vertex):
    indptr = np.zeros(len(per_vertex) + 1, dtype=np.int64)
    np.cumsum([len(e) for e in per_vertex], out=indptr[1:])
    hubs, dists, parents = [], [], []
    for v, entries in enumerate(per_vertex):
        for hub, d in sorted(entries):
            hubs.append(hub)
            dists.append(d)
            parents.append(v if d == 0 else hub)
    return (
        indptr,
        np.array(hubs, dtype=np.int64),
        np.array(dists, dtype=np.int64),
        np.array(parents, dtype=np.int64),
    )


def fig1_reference_labels() -> LabelIndex:
    """A valid (cover-property) label index for the fixture whose contents
    match the worked examples; any correctly built index joins to the same
    distances, but hub sets depend on the landmark order."""
    side_in = _csr_side(_FIG1_L_IN)
    side_out = _csr_side(_FIG1_L_OUT)
    return LabelIndex(8, *side_in, *side_out, landmark_order=np.arange(8, dtype=np.int64))


@dataclass(frozen=True)
class Query:
    s: int
    t: int
    seq: tuple[str, ...]
    k: int


def random_instance(
    seed: int,
    num_vertices: int = 60,
    num_categories: int = 4,
    members_per_category: int = 5,
    max_k: int = 5,
) -> tuple[Graph, CategoryMap, Query]:
    """A seeded random digraph with a query, sized for exhaustive oracles.

    The graph gets a backbone cycle (so it is connected-ish but directed
    reachability still varies), random extra arcs with weights in [1, 100],
    and categories whose members may overlap across categories.
    """
    rng = random.Random(seed)
    n = rng.randint(8, max(8, num_vertices))
    arcs = [(i, (i + 1) % n, rng.randint(1, 100)) for i in range(n)]
    extra = rng.randint(n, 3 * n)
    for _ in range(extra):
        u = rng.randrange(n)
        v = rng.randrange(n)
        if u != v:
            arcs.append((u, v, rng.randint(1, 100)))
    g = Graph.from_arcs(n, arcs, undirected=False)

    num_cats = rng.randint(1, max(1, num_categories))
    cm = CategoryMap.empty(n, (str(i) for i in range(num_cats)))
    for i in range(num_cats):
        size = rng.randint(1, max(1, members_per_category))
        for v in rng.sample(range(n), min(size, n)):
            cm.add_member(v, str(i))

    seq = tuple(str(rng.randrange(num_cats)) for _ in range(rng.randint(1, num_cats)))
    query = Query(rng.randrange(n), rng.randrange(n), seq, rng.randint(1, max_k))
    return g, cm, query


def bench_graph(num_vertices: int, seed: int, avg_extra_degree: int = 3) -> Graph:
    """Synthetic undirected graph with a hub hierarchy: each vertex attaches
    to earlier vertices with a quadratic bias toward low ids, which keeps hub
    label sizes small at scale."""
    rng = random.Random(seed)
    arcs: list[tuple[int, int, int]] = []
    for v in range(1, num_vertices):
        targets = {int(rng.random() ** 2 * v) for _ in range(avg_extra_degree)}
        targets.add(rng.randrange(v))
        for u in targets:
            if u != v:
                w = rng.randint(1, 100)
                arcs.append((u, v, w))
                arcs.append((v, u, w))
    return Graph.from_arcs(num_vertices, arcs, undirected=True)
