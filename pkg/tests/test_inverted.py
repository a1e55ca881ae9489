import random

import pytest

from kosr.fixtures import fig1_reference_labels, random_instance
from kosr.graph import CategoryError
from kosr.inverted import (
    CursorStore,
    add_vertex_category,
    build_all_inverted,
    build_inverted_index,
    find_nn,
    remove_vertex_category,
)
from kosr.labels import build_labels

from oracles import nn_sequence

S, A, B, C, D, E, F, T = range(8)


def test_fig1_inverted_ma(fig1):
    # Table-of-examples inverted index; stated against the reference label
    # index, whose hub sets the worked examples assume.
    _g, cm = fig1
    ref = fig1_reference_labels()
    il = build_inverted_index(ref, cm, "MA")
    assert il.postings[S] == [(8, A), (10, C)]
    assert il.postings[T] == [(15, C), (33, A)]
    assert il.postings[A] == [(0, A)]
    assert il.postings[C] == [(0, C)]


def test_reference_labels_join_to_fixture_distances(fig1):
    from kosr.fixtures import FIG1_DIST

    ref = fig1_reference_labels()
    for u in range(8):
        for v in range(8):
            assert ref.dist(u, v) == FIG1_DIST[u][v]


def test_empty_category(fig1, fig1_labels):
    g, cm = fig1
    cm.categories.append("empty")
    cm.members["empty"] = []
    try:
        il = build_inverted_index(fig1_labels, cm, "empty")
        assert il.postings == {}
    finally:
        cm.categories.remove("empty")
        del cm.members["empty"]


def test_unknown_category(fig1, fig1_labels):
    _g, cm = fig1
    with pytest.raises(CategoryError):
        build_inverted_index(fig1_labels, cm, "nope")


def test_find_nn_fig1(fig1, fig1_labels):
    _g, cm = fig1
    il = build_inverted_index(fig1_labels, cm, "MA")
    store = CursorStore()
    assert find_nn(store, fig1_labels, il, S, "MA", 1) == (A, 8)
    assert find_nn(store, fig1_labels, il, S, "MA", 2) == (C, 10)
    assert find_nn(store, fig1_labels, il, S, "MA", 3) is None


def test_find_nn_cache_hits_counted_once(fig1, fig1_labels):
    _g, cm = fig1
    il = build_inverted_index(fig1_labels, cm, "MA")
    store = CursorStore()
    assert find_nn(store, fig1_labels, il, S, "MA", 1) == (A, 8)
    n = store.nn_queries
    assert find_nn(store, fig1_labels, il, S, "MA", 1) == (A, 8)
    assert store.nn_queries == n  # served from the produced list
    find_nn(store, fig1_labels, il, S, "MA", 2)
    assert store.nn_queries == n + 1


def test_member_vertex_is_own_neighbor(fig1, fig1_labels):
    _g, cm = fig1
    il = build_inverted_index(fig1_labels, cm, "RE")
    store = CursorStore()
    assert find_nn(store, fig1_labels, il, B, "RE", 1) == (B, 0)


@pytest.mark.parametrize("seed", range(12))
def test_find_nn_matches_dijkstra_order(seed):
    g, cm, _q = random_instance(seed)
    idx = build_labels(g)
    rng = random.Random(seed)
    for c in cm.categories:
        il = build_inverted_index(idx, cm, c)
        for v in rng.sample(range(g.vertex_count), min(8, g.vertex_count)):
            store = CursorStore()
            expect = nn_sequence(g, v, cm.members[c])
            got = []
            x = 1
            while True:
                r = find_nn(store, idx, il, v, c, x)
                if r is None:
                    break
                got.append(r)
                x += 1
            assert got == expect, (seed, c, v)


def test_monotone_costs_and_position_bound(fig1, fig1_labels):
    g, cm = fig1
    for c in cm.categories:
        il = build_inverted_index(fig1_labels, cm, c)
        for v in range(8):
            store = CursorStore()
            costs = []
            x = 1
            while (r := find_nn(store, fig1_labels, il, v, c, x)) is not None:
                costs.append(r[1])
                x += 1
            assert costs == sorted(costs)
            budget = sum(
                len(il.postings.get(hub, ())) for hub, _d in fig1_labels.out_items(v)
            )
            assert store.positions_scanned() <= budget


def test_find_nn_preference_predicate(fig1, fig1_labels):
    # A preference filter narrows the candidates without disturbing ranks:
    # keeping only vertex c in MA makes it the first neighbor of s.
    _g, cm = fig1
    il = build_inverted_index(fig1_labels, cm, "MA")
    store = CursorStore()
    only_c = lambda m: m == C  # noqa: E731
    assert find_nn(store, fig1_labels, il, S, "MA", 1, accept=only_c) == (C, 10)
    assert find_nn(store, fig1_labels, il, S, "MA", 2, accept=only_c) is None


def test_add_existing_member_is_noop(fig1, fig1_labels):
    _g, cm = fig1
    il = build_inverted_index(fig1_labels, cm, "MA")
    before = {h: list(lst) for h, lst in il.postings.items()}
    assert add_vertex_category(cm, il, fig1_labels, A, "MA") is False
    assert il.postings == before


def test_add_b_to_ma_keeps_first_neighbor(fig1, fig1_labels):
    # dis(s,b)=13 > dis(s,a)=8, so the nearest MA member from s is unchanged.
    _g, cm = fig1
    il = build_inverted_index(fig1_labels, cm, "MA")
    assert add_vertex_category(cm, il, fig1_labels, B, "MA") is True
    try:
        store = CursorStore()
        assert find_nn(store, fig1_labels, il, S, "MA", 1) == (A, 8)
        rebuilt = build_inverted_index(fig1_labels, cm, "MA")
        assert il.postings == rebuilt.postings
    finally:
        assert remove_vertex_category(cm, il, fig1_labels, B, "MA") is True


def test_remove_a_from_ma(fig1, fig1_labels):
    _g, cm = fig1
    il = build_inverted_index(fig1_labels, cm, "MA")
    assert remove_vertex_category(cm, il, fig1_labels, A, "MA") is True
    try:
        store = CursorStore()
        assert find_nn(store, fig1_labels, il, S, "MA", 1) == (C, 10)
        assert il.postings == build_inverted_index(fig1_labels, cm, "MA").postings
    finally:
        add_vertex_category(cm, il, fig1_labels, A, "MA")


def test_remove_only_member():
    g, cm, _q = random_instance(3, num_categories=1, members_per_category=1)
    idx = build_labels(g)
    c = cm.categories[0]
    il = build_inverted_index(idx, cm, c)
    for v in list(cm.members[c]):
        remove_vertex_category(cm, il, idx, v, c)
    assert cm.members[c] == []
    assert il.postings == {}


@pytest.mark.parametrize("seed", range(6))
def test_random_updates_equal_rebuild(seed):
    g, cm, _q = random_instance(seed + 40)
    idx = build_labels(g)
    postings = build_all_inverted(idx, cm)
    rng = random.Random(seed)
    for _ in range(100):
        c = rng.choice(cm.categories)
        v = rng.randrange(g.vertex_count)
        if rng.random() < 0.5:
            add_vertex_category(cm, postings[c], idx, v, c)
        else:
            remove_vertex_category(cm, postings[c], idx, v, c)
    for c in cm.categories:
        rebuilt = build_inverted_index(idx, cm, c)
        assert postings[c].postings == rebuilt.postings, (seed, c)
    # a find_nn sweep agrees with the plain shortest-path order after updates
    for c in cm.categories:
        for v in rng.sample(range(g.vertex_count), min(5, g.vertex_count)):
            store = CursorStore()
            got = []
            x = 1
            while (r := find_nn(store, idx, postings[c], v, c, x)) is not None:
                got.append(r)
                x += 1
            assert got == nn_sequence(g, v, cm.members[c])
