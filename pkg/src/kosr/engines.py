"""Top-k sequenced-route query engines.

Three engines share one search loop over partial witnesses ``(s, v_1, ..,
v_q)`` ordered in a priority queue:

* ``kpne``      -- plain progressive neighbor exploration, queue keyed by cost;
* ``pruning_kosr`` -- adds dominance tables: the first witness of a given
  length extended at a vertex blocks later same-length arrivals, which are
  parked and reconsidered only after a result that runs through the blocking
  prefix;
* ``star_kosr`` -- the dominance engine with every queue keyed by
  ``cost + dis(last, destination)`` and candidate generation ordered by that
  estimate.

Each engine also exists in a ``-dij`` variant where nearest neighbors come
from plain shortest-path searches on the graph instead of the inverted label
index; results and counters are identical, only the lookup machinery differs.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field
from heapq import heappop, heappush
from typing import Callable, Mapping

from .graph import CategoryError, CategoryMap, Graph
from .inverted import CursorStore, InvertedLabelIndex, build_inverted_index, find_nn


class QueryTimeout(RuntimeError):
    """Raised when a query exceeds its deadline."""


@dataclass(frozen=True)
class Witness:
    """A feasible route's identity: the category representatives in order,
    with the total cost over shortest-path legs."""

    vertices: tuple[int, ...]
    cost: int


@dataclass
class QueryStats:
    examined_routes: int = 0
    extended_routes: int = 0
    nn_queries: int = 0
    runtime: float = 0.0
    result_costs: list[int] = field(default_factory=list)


# ---------------------------------------------------------------------------
# Plain shortest-path searches (oracle legs and the -dij providers).


def dijkstra_from(g: Graph, source: int, reverse: bool = False) -> list[int | None]:
    """Single-source distances over forward or reversed arcs."""
    indptr = g.rindptr if reverse else g.indptr
    heads = g.rheads if reverse else g.heads
    weights = g.rweights if reverse else g.weights
    dist: list[int | None] = [None] * g.vertex_count
    heap = [(0, source)]
    while heap:
        d, u = heappop(heap)
        if dist[u] is not None:
            continue
        dist[u] = d
        lo, hi = int(indptr[u]), int(indptr[u + 1])
        for e in range(lo, hi):
            v = int(heads[e])
            if dist[v] is None:
                heappush(heap, (d + int(weights[e]), v))
    return dist


def _dijkstra_members(g: Graph, source: int, members: set[int], x: int) -> list[tuple[int, int]]:
    """Settle vertices from ``source`` until ``x`` members are found; returns
    the members in (dist, id) settle order (shorter when exhausted)."""
    found: list[tuple[int, int]] = []
    settled = [False] * g.vertex_count
    heap = [(0, source)]
    while heap and len(found) < x:
        d, u = heappop(heap)
        if settled[u]:
            continue
        settled[u] = True
        if u in members:
            found.append((u, d))
            if len(found) >= x:
                break
        lo, hi = int(g.indptr[u]), int(g.indptr[u + 1])
        for e in range(lo, hi):
            v = int(g.heads[e])
            if not settled[v]:
                heappush(heap, (d + int(g.weights[e]), v))
    return found


def dijkstra_nn(g: Graph, cm: CategoryMap, v: int, category: str, x: int) -> tuple[int, int] | None:
    """The x-th nearest member of the category from ``v`` found by a
    label-setting search that stops at the x-th settled member.  Same contract
    and tie order as the inverted-index lookup."""
    if x < 1:
        raise ValueError("rank must be >= 1")
    if category not in cm.members:
        raise CategoryError(f"unknown category {category!r}")
    found = _dijkstra_members(g, v, set(cm.members[category]), x)
    return found[x - 1] if len(found) >= x else None


# ---------------------------------------------------------------------------
# Nearest-neighbor providers.  Category positions are 1-based along the query
# sequence; position len(seq)+1 is the destination's singleton category.


class LabelNNProvider:
    """Rank lookups backed by the inverted label indexes."""

    def __init__(self, label_access, postings: Mapping[str, InvertedLabelIndex], seq: list[str], t: int):
        self.labels = label_access
        self.postings = postings
        self.seq = seq
        self.t = t
        self.store = CursorStore()
        self._dest_cache: dict[int, int | None] = {}
        self._dummy_served: set[int] = set()
        self._dummy_queries = 0

    @property
    def nn_queries(self) -> int:
        return self.store.nn_queries + self._dummy_queries

    def dist_to_dest(self, v: int) -> int | None:
        if v in self._dest_cache:
            return self._dest_cache[v]
        d = self.labels.dist(v, self.t)
        self._dest_cache[v] = d
        return d

    def find_nn(self, v: int, pos: int, x: int) -> tuple[int, int] | None:
        if pos == len(self.seq) + 1:
            if x > 1:
                return None
            if v not in self._dummy_served:
                self._dummy_served.add(v)
                self._dummy_queries += 1
            d = self.dist_to_dest(v)
            return None if d is None else (self.t, d)
        c = self.seq[pos - 1]
        return find_nn(self.store, self.labels, self.postings[c], v, c, x)


class DijkstraNNProvider:
    """Rank lookups recomputed by shortest-path searches on the graph.

    Each non-cached rank restarts the search from scratch (the baseline the
    indexed lookup is measured against); produced prefixes are cached per
    (vertex, category) so counters match the indexed provider exactly.
    Destination distances come from one backward search from ``t``.
    """

    def __init__(self, g: Graph, cm: CategoryMap, seq: list[str], t: int):
        self.graph = g
        self.cm = cm
        self.seq = seq
        self.t = t
        self.nn_queries = 0
        self._cursors: dict[tuple[int, str], tuple[list[tuple[int, int]], bool]] = {}
        self._to_dest: list[int | None] | None = None
        self._dummy_served: set[int] = set()
        self._member_sets: dict[str, set[int]] = {}

    def dist_to_dest(self, v: int) -> int | None:
        if self._to_dest is None:
            self._to_dest = dijkstra_from(self.graph, self.t, reverse=True)
        return self._to_dest[v]

    def find_nn(self, v: int, pos: int, x: int) -> tuple[int, int] | None:
        if pos == len(self.seq) + 1:
            if x > 1:
                return None
            if v not in self._dummy_served:
                self._dummy_served.add(v)
                self.nn_queries += 1
            d = self.dist_to_dest(v)
            return None if d is None else (self.t, d)
        c = self.seq[pos - 1]
        produced, exhausted = self._cursors.get((v, c), ([], False))
        if x <= len(produced):
            return produced[x - 1]
        if exhausted:
            return None
        self.nn_queries += 1
        members = self._member_sets.get(c)
        if members is None:
            members = set(self.cm.members[c])
            self._member_sets[c] = members
        found = _dijkstra_members(self.graph, v, members, x)
        self._cursors[(v, c)] = (found, len(found) < x)
        return found[x - 1] if len(found) >= x else None


# ---------------------------------------------------------------------------
# Nearest estimated neighbors (the A* candidate order).


class ENCursor:
    """Per (vertex, position) state for estimated-neighbor production.

    ``pending`` holds the last plain nearest neighbor fetched but not yet
    queued; a queued candidate is final once the next plain neighbor is
    strictly farther than the queue minimum's estimate (members at equal
    distance may still tie on estimate and must enter the queue first to keep
    the (estimate, id) order exact)."""

    __slots__ = ("produced", "heap", "pending", "nn_rank", "nn_exhausted")

    def __init__(self):
        self.produced: list[tuple[int, int]] = []
        self.heap: list[tuple[int, int]] = []
        self.pending: tuple[int, int] | None = None
        self.nn_rank = 0
        self.nn_exhausted = False


def _next_estimated(provider, cur: ENCursor, v: int, pos: int) -> tuple[int, int] | None:
    while True:
        if cur.pending is None and not cur.nn_exhausted:
            r = provider.find_nn(v, pos, cur.nn_rank + 1)
            cur.nn_rank += 1
            if r is None:
                cur.nn_exhausted = True
            else:
                cur.pending = r
        if cur.pending is not None:
            u, d = cur.pending
            if cur.heap and d > cur.heap[0][0]:
                return heappop(cur.heap)[::-1]
            cur.pending = None
            h = provider.dist_to_dest(u)
            if h is not None:
                heappush(cur.heap, (d + h, u))
            continue
        if cur.heap:
            return heappop(cur.heap)[::-1]
        return None


def find_nen(provider, store: dict, v: int, pos: int, x: int) -> tuple[int, int] | None:
    """The x-th member of the position's category by ``dis(v, u) + dis(u,
    t)``, ties by vertex id; members unreachable from ``v`` or to the
    destination are skipped; None when exhausted."""
    if x < 1:
        raise ValueError("rank must be >= 1")
    cur = store.get((v, pos))
    if cur is None:
        cur = ENCursor()
        store[(v, pos)] = cur
    while len(cur.produced) < x:
        nxt = _next_estimated(provider, cur, v, pos)
        if nxt is None:
            return None
        cur.produced.append(nxt)
    return cur.produced[x - 1]


# ---------------------------------------------------------------------------
# Query context and the shared search loop.


@dataclass
class QueryContext:
    """Immutable inputs shared by concurrent queries; per-query state lives
    inside the engine call.  ``graph`` may be omitted for disk-backed label
    queries, which never touch adjacency; ``vertex_count`` then bounds the
    vertex ids instead."""

    graph: Graph | None
    categories: CategoryMap
    labels: object | None = None
    postings: dict[str, InvertedLabelIndex] | None = None
    vertex_count: int | None = None

    @property
    def num_vertices(self) -> int:
        return self.graph.vertex_count if self.graph is not None else self.vertex_count

    def get_postings(self, category: str) -> InvertedLabelIndex:
        if self.postings is not None and category in self.postings:
            return self.postings[category]
        if self.labels is None:
            raise CategoryError(f"no inverted index available for {category!r}")
        built = build_inverted_index(self.labels, self.categories, category)
        if self.postings is None:
            self.postings = {}
        self.postings[category] = built
        return built


def _validate(ctx: QueryContext, s: int, t: int, seq: list[str], k: int) -> None:
    n = ctx.num_vertices
    if not (0 <= s < n and 0 <= t < n):
        raise ValueError(f"vertex out of range: s={s}, t={t}")
    if k < 1:
        raise ValueError("k must be >= 1")
    if not seq:
        raise ValueError("category sequence must be non-empty")
    for c in seq:
        if c not in ctx.categories.members:
            raise CategoryError(f"unknown category {c!r}")


def _search(
    provider,
    s: int,
    t: int,
    seq: list[str],
    k: int,
    estimated: bool,
    prune: bool,
    deadline: float | None,
    trace: list | None,
) -> tuple[list[Witness], QueryStats]:
    stats = QueryStats()
    started = time.perf_counter()
    total_len = len(seq) + 2
    results: list[Witness] = []
    emitted: set[tuple[int, ...]] = set()
    en_store: dict = {}

    def gen(base_cost: int, v: int, pos: int, rank: int) -> tuple[int, int, int] | None:
        # Returns (vertex, cost, queue key) for the candidate at this rank.
        if estimated:
            r = find_nen(provider, en_store, v, pos, rank)
            if r is None:
                return None
            u, est = r
            return u, base_cost + est - provider.dist_to_dest(u), base_cost + est
        r = provider.find_nn(v, pos, rank)
        if r is None:
            return None
        u, leg = r
        c2 = base_cost + leg
        return u, c2, c2

    if estimated:
        h0 = provider.dist_to_dest(s)
        if h0 is None:
            stats.nn_queries = provider.nn_queries
            stats.runtime = time.perf_counter() - started
            return [], stats
        root_key = h0
    else:
        root_key = 0

    frontier: list[tuple[int, tuple[int, ...], int, int, int | None]] = [(root_key, (s,), 0, 0, 1)]
    dominating: dict[tuple[int, int], tuple[int, ...]] = {}
    dominated: dict[tuple[int, int], list[tuple[int, tuple[int, ...], int]]] = {}

    while frontier and len(results) < k:
        key, wit, cost, pcost, x = heappop(frontier)
        if len(wit) > 1:
            # The seeding extraction of the bare source is not a generated
            # candidate and stays outside the examined-route count.
            stats.examined_routes += 1
        if deadline is not None and time.monotonic() > deadline:
            raise QueryTimeout(f"query exceeded deadline after {stats.examined_routes} extractions")
        if trace is not None:
            trace.append(("pop", wit, key, x))

        if len(wit) == total_len:
            if wit in emitted:
                continue
            emitted.add(wit)
            results.append(Witness(wit, cost))
            stats.result_costs.append(cost)
            if trace is not None:
                trace.append(("result", wit, cost))
            if prune and len(results) < k:
                # Release the cheapest parked route under each prefix of the
                # result and free that slot for the next arrival.
                for i in range(1, len(wit) - 1):
                    slot = (wit[i], i + 1)
                    if dominating.get(slot) == wit[: i + 1]:
                        del dominating[slot]
                        queue = dominated.get(slot)
                        if queue:
                            k2, w2, c2 = heappop(queue)
                            heappush(frontier, (k2, w2, c2, 0, None))
                            if trace is not None:
                                trace.append(("readd", w2, k2))
            continue

        qpos = len(wit) - 1
        extend = True
        if prune:
            slot = (wit[-1], len(wit))
            if slot not in dominating:
                dominating[slot] = wit
                if trace is not None:
                    trace.append(("claim", wit, key))
            else:
                heappush(dominated.setdefault(slot, []), (key, wit, cost))
                if trace is not None:
                    trace.append(("park", wit, key))
                extend = False

        if extend:
            stats.extended_routes += 1
            child = gen(cost, wit[-1], qpos + 1, 1)
            if child is not None:
                u, c2, k2 = child
                heappush(frontier, (k2, wit + (u,), c2, cost, 1))
                if trace is not None:
                    trace.append(("insert", wit + (u,), k2, 1))
        if qpos >= 1 and x is not None:
            sib = gen(pcost, wit[-2], qpos, x + 1)
            if sib is not None:
                u, c2, k2 = sib
                heappush(frontier, (k2, wit[:-1] + (u,), c2, pcost, x + 1))
                if trace is not None:
                    trace.append(("insert", wit[:-1] + (u,), k2, x + 1))

    stats.nn_queries = provider.nn_queries
    stats.runtime = time.perf_counter() - started
    return results, stats


def _run(
    ctx: QueryContext,
    s: int,
    t: int,
    seq: list[str],
    k: int,
    estimated: bool,
    prune: bool,
    use_dijkstra: bool,
    deadline: float | None,
    trace: list | None,
) -> tuple[list[Witness], QueryStats]:
    seq = list(seq)
    _validate(ctx, s, t, seq, k)
    if use_dijkstra:
        provider = DijkstraNNProvider(ctx.graph, ctx.categories, seq, t)
    else:
        postings = {c: ctx.get_postings(c) for c in dict.fromkeys(seq)}
        provider = LabelNNProvider(ctx.labels, postings, seq, t)
    return _search(provider, s, t, seq, k, estimated, prune, deadline, trace)


def kpne(ctx, s, t, seq, k, deadline=None, trace=None):
    """Baseline: extend every extracted route; no dominance pruning."""
    return _run(ctx, s, t, seq, k, False, False, False, deadline, trace)


def pruning_kosr(ctx, s, t, seq, k, deadline=None, trace=None):
    """Dominance-pruned search keyed by real cost."""
    return _run(ctx, s, t, seq, k, False, True, False, deadline, trace)


def star_kosr(ctx, s, t, seq, k, deadline=None, trace=None):
    """Dominance-pruned search keyed by cost plus distance-to-destination."""
    return _run(ctx, s, t, seq, k, True, True, False, deadline, trace)


def kpne_dij(ctx, s, t, seq, k, deadline=None, trace=None):
    return _run(ctx, s, t, seq, k, False, False, True, deadline, trace)


def pruning_kosr_dij(ctx, s, t, seq, k, deadline=None, trace=None):
    return _run(ctx, s, t, seq, k, False, True, True, deadline, trace)


def star_kosr_dij(ctx, s, t, seq, k, deadline=None, trace=None):
    return _run(ctx, s, t, seq, k, True, True, True, deadline, trace)


ENGINES: dict[str, Callable] = {
    "kpne": kpne,
    "pk": pruning_kosr,
    "sk": star_kosr,
    "kpne-dij": kpne_dij,
    "pk-dij": pruning_kosr_dij,
    "sk-dij": star_kosr_dij,
}

LABEL_ENGINES = ("kpne", "pk", "sk")


# ---------------------------------------------------------------------------
# Brute-force reference.

ORACLE_ENUMERATION_GUARD = 10**6


def oracle_topk(g: Graph, cm: CategoryMap, s: int, t: int, seq: list[str], k: int) -> list[Witness]:
    """Enumerate every witness over the category member lists, cost each leg
    with a fresh shortest-path search, and return the k cheapest by
    (cost, vertex sequence).  Deliberately independent of the engines and the
    label index."""
    for c in seq:
        if c not in cm.members:
            raise CategoryError(f"unknown category {c!r}")
    member_lists = [cm.members[c] for c in seq]
    size = 1
    for lst in member_lists:
        size *= len(lst)
        if size > ORACLE_ENUMERATION_GUARD:
            raise ValueError("instance too large to enumerate")
    sources = {s}
    for lst in member_lists:
        sources.update(lst)
    rows = {src: dijkstra_from(g, src) for src in sources}
    feasible: list[tuple[int, tuple[int, ...]]] = []
    for combo in itertools.product(*member_lists):
        wit = (s, *combo, t)
        cost = 0
        for a, b in zip(wit, wit[1:]):
            leg = rows[a][b]
            if leg is None:
                cost = None
                break
            cost += leg
        if cost is not None:
            feasible.append((cost, wit))
    feasible.sort()
    return [Witness(w, c) for c, w in feasible[:k]]
