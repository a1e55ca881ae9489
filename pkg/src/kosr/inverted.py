"""Per-category inverted label indexes and the incremental x-th
nearest-neighbor cursor.

For a category c, every in-label entry ``(hub, d)`` of every member u becomes
a posting ``(d, u)`` under that hub, and each hub's posting list is sorted by
``(d, u)``.  Finding the x-th nearest member of c from a vertex v is then a
k-way merge: seed one candidate per hub of L_out(v) and pop globally, which
yields members in exact ``(dis(v, u), u)`` order without rescanning.
"""

from __future__ import annotations

from bisect import insort
from dataclasses import dataclass, field
from heapq import heappop, heappush
from .graph import CategoryError, CategoryMap


@dataclass
class InvertedLabelIndex:
    """Posting lists of one category: hub -> [(dist, member), ...] ascending."""

    category: str
    postings: dict[int, list[tuple[int, int]]] = field(default_factory=dict)

    def member_count(self) -> int:
        seen = set()
        for lst in self.postings.values():
            seen.update(m for _, m in lst)
        return len(seen)


def build_inverted_index(labels, cm: CategoryMap, category: str) -> InvertedLabelIndex:
    if category not in cm.members:
        raise CategoryError(f"unknown category {category!r}")
    postings: dict[int, list[tuple[int, int]]] = {}
    for u in cm.members[category]:
        for hub, d, _parent in labels.in_entries(u):
            postings.setdefault(hub, []).append((d, u))
    for lst in postings.values():
        lst.sort()
    return InvertedLabelIndex(category, postings)


class NNCursor:
    """Incremental nearest-neighbor state for one (vertex, category) pair.

    ``produced`` is the prefix of members already emitted in (dist, id)
    order.  The heap holds at most one pending posting per hub of L_out(v);
    popping the global minimum advances that hub's position.  Members can sit
    in the heap once per hub; duplicates are skipped when popped, never
    emitted.
    """

    __slots__ = (
        "produced", "heap", "lists", "positions", "emitted", "exhausted",
        "positions_scanned", "accept",
    )

    def __init__(self, out_items: list[tuple[int, int]], il: InvertedLabelIndex, accept=None):
        self.produced: list[tuple[int, int]] = []
        self.heap: list[tuple[int, int, int]] = []  # (total, member, hub slot)
        self.lists: list[tuple[int, list[tuple[int, int]]]] = []  # (hub offset d_v_hub, postings)
        self.positions: list[int] = []
        self.emitted: set[int] = set()
        self.exhausted = False
        self.positions_scanned = 0
        self.accept = accept
        for hub, d in out_items:
            lst = il.postings.get(hub)
            if not lst:
                continue
            slot = len(self.lists)
            self.lists.append((d, lst))
            self.positions.append(1)
            self.positions_scanned += 1
            heappush(self.heap, (d + lst[0][0], lst[0][1], slot))
        if not self.heap:
            self.exhausted = True

    def _advance(self, slot: int) -> None:
        offset, lst = self.lists[slot]
        pos = self.positions[slot]
        while pos < len(lst):
            d, member = lst[pos]
            pos += 1
            self.positions_scanned += 1
            if member not in self.emitted:
                heappush(self.heap, (offset + d, member, slot))
                break
        self.positions[slot] = pos

    def pull(self) -> tuple[int, int] | None:
        """Produce the next member in (dist, id) order, or None at exhaustion."""
        while self.heap:
            total, member, slot = heappop(self.heap)
            self._advance(slot)
            if member in self.emitted:
                continue
            self.emitted.add(member)
            if self.accept is not None and not self.accept(member):
                continue  # filtered members never occupy a rank
            self.produced.append((member, total))
            return member, total
        self.exhausted = True
        return None


class CursorStore:
    """Per-query cursor cache with the non-cached query counter."""

    def __init__(self):
        self.cursors: dict[tuple[int, str], NNCursor] = {}
        self.nn_queries = 0

    def positions_scanned(self) -> int:
        return sum(c.positions_scanned for c in self.cursors.values())


def find_nn(
    store: CursorStore, labels, il: InvertedLabelIndex, v: int, category: str, x: int, accept=None
) -> tuple[int, int] | None:
    """The x-th nearest member of the category from ``v`` by shortest-path
    cost, ties by vertex id; None when fewer than x members are reachable.

    Ranks already produced are served from the cursor without scanning and
    without incrementing the query counter.  ``accept`` optionally filters
    candidate members (a per-cursor preference predicate); filtered members
    do not occupy ranks.
    """
    if x < 1:
        raise ValueError("rank must be >= 1")
    cursor = store.cursors.get((v, category))
    created = cursor is None
    if created:
        cursor = NNCursor(labels.out_items(v), il, accept=accept)
        store.cursors[(v, category)] = cursor
    if x <= len(cursor.produced):
        return cursor.produced[x - 1]
    if cursor.exhausted and not created:
        return None
    store.nn_queries += 1
    while len(cursor.produced) < x:
        if cursor.pull() is None:
            return None
    return cursor.produced[x - 1]


def add_vertex_category(cm: CategoryMap, il: InvertedLabelIndex, labels, v: int, category: str) -> bool:
    """Add ``v`` to the category and splice its postings in sorted position.
    Returns False (and changes nothing) when the membership already exists."""
    if not cm.add_member(v, category):
        return False
    for hub, d, _parent in labels.in_entries(v):
        insort(il.postings.setdefault(hub, []), (d, v))
    return True


def remove_vertex_category(cm: CategoryMap, il: InvertedLabelIndex, labels, v: int, category: str) -> bool:
    """Inverse of :func:`add_vertex_category`; drops hubs whose posting list
    becomes empty so the result matches an index rebuilt from scratch."""
    if not cm.remove_member(v, category):
        return False
    for hub, d, _parent in labels.in_entries(v):
        lst = il.postings.get(hub)
        if lst is None:
            continue
        lst.remove((d, v))
        if not lst:
            del il.postings[hub]
    return True


def build_all_inverted(labels, cm: CategoryMap) -> dict[str, InvertedLabelIndex]:
    return {c: build_inverted_index(labels, cm, c) for c in cm.categories}
