import random
import time

import pytest

from kosr.engines import (
    ENGINES,
    LabelNNProvider,
    QueryContext,
    QueryTimeout,
    Witness,
    dijkstra_nn,
    find_nen,
    kpne,
    oracle_topk,
    pruning_kosr,
    star_kosr,
)
from kosr.fixtures import random_instance
from kosr.graph import CategoryError
from kosr.inverted import CursorStore, build_all_inverted, find_nn
from kosr.labels import build_labels

from oracles import (
    best_completion_cost,
    brute_force_topk,
    estimated_sequence,
    search_space_bounds,
)

S, A, B, C, D, E, F, T = range(8)
FIG1_SEQ = ["MA", "RE", "CI"]


def make_ctx(g, cm, idx=None):
    idx = idx or build_labels(g)
    return QueryContext(g, cm, labels=idx, postings=build_all_inverted(idx, cm))


# ---------------------------------------------------------------------------
# Worked example, all engines.


def test_fig1_top3_costs_and_witnesses(fig1_ctx):
    expect = [
        Witness((S, A, B, D, T), 20),
        Witness((S, A, E, D, T), 21),
        Witness((S, C, B, D, T), 22),
    ]
    for name, fn in ENGINES.items():
        results, _ = fn(fig1_ctx, S, T, FIG1_SEQ, 3)
        assert results == expect, name


def test_fig1_top2_witness_set(fig1_ctx):
    results, _ = kpne(fig1_ctx, S, T, FIG1_SEQ, 2)
    assert {w.vertices for w in results} == {(S, A, B, D, T), (S, A, E, D, T)}


def test_fig1_k_exceeds_feasible(fig1_ctx):
    g, cm = fig1_ctx.graph, fig1_ctx.categories
    expect = oracle_topk(g, cm, S, T, FIG1_SEQ, 1000)
    assert len(expect) == 8  # all 2*2*2 member combinations are feasible
    for name, fn in ENGINES.items():
        results, _ = fn(fig1_ctx, S, T, FIG1_SEQ, 1000)
        assert results == expect, name


def test_fig1_pk_parks_scb_before_first_result(fig1_ctx):
    trace = []
    pruning_kosr(fig1_ctx, S, T, FIG1_SEQ, 2, trace=trace)
    parked = [i for i, ev in enumerate(trace) if ev[0] == "park" and ev[1] == (S, C, B)]
    first_result = next(i for i, ev in enumerate(trace) if ev[0] == "result")
    assert parked and parked[0] < first_result
    assert trace[parked[0]][2] == 15  # parked at cost 15
    # the parked route is reconsidered (re-added) after the first result
    readds = [i for i, ev in enumerate(trace) if ev[0] == "readd" and ev[1] == (S, C, B)]
    assert readds and readds[0] > first_result


def test_fig1_pk_second_result(fig1_ctx):
    results, stats = pruning_kosr(fig1_ctx, S, T, FIG1_SEQ, 2)
    assert results[1] == Witness((S, A, E, D, T), 21)
    # 13 extractions in the worked trace; the counter omits the seed pop
    assert stats.examined_routes == 12


def test_fig1_sk_trace(fig1_ctx):
    trace = []
    results, stats = star_kosr(fig1_ctx, S, T, FIG1_SEQ, 2, trace=trace)
    pops = [ev for ev in trace if ev[0] == "pop"]
    # second extraction is (s, c) with estimated key 17
    assert pops[1][1] == (S, C) and pops[1][2] == 17
    # first complete result appears at the sixth extraction with key 20
    assert pops[5][1] == (S, A, B, D, T) and pops[5][2] == 20
    assert results[0].cost == 20 and results[1].cost == 21
    # 9 extractions in the worked trace; the counter omits the seed pop
    assert stats.examined_routes == 8
    assert len(pops) == 9


def test_fig1_sk_examined_not_more_than_pk(fig1_ctx):
    _, pk_stats = pruning_kosr(fig1_ctx, S, T, FIG1_SEQ, 2)
    _, sk_stats = star_kosr(fig1_ctx, S, T, FIG1_SEQ, 2)
    assert sk_stats.examined_routes <= pk_stats.examined_routes


def test_empty_category_gives_empty_result(fig1_ctx):
    cm = fig1_ctx.categories
    cm.categories.append("none")
    cm.members["none"] = []
    try:
        for name, fn in ENGINES.items():
            results, _ = fn(fig1_ctx, S, T, ["MA", "none"], 2)
            assert results == [], name
    finally:
        cm.categories.remove("none")
        del cm.members["none"]
        fig1_ctx.postings.pop("none", None)


def test_unknown_category_raises(fig1_ctx):
    with pytest.raises(CategoryError):
        kpne(fig1_ctx, S, T, ["MA", "nope"], 1)


def test_invalid_arguments(fig1_ctx):
    with pytest.raises(ValueError):
        kpne(fig1_ctx, S, T, FIG1_SEQ, 0)
    with pytest.raises(ValueError):
        kpne(fig1_ctx, -1, T, FIG1_SEQ, 1)
    with pytest.raises(ValueError):
        kpne(fig1_ctx, S, 99, FIG1_SEQ, 1)
    with pytest.raises(ValueError):
        kpne(fig1_ctx, S, T, [], 1)


# ---------------------------------------------------------------------------
# Estimated-neighbor lookups.


def _label_provider(ctx, seq, t):
    postings = {c: ctx.get_postings(c) for c in set(seq)}
    return LabelNNProvider(ctx.labels, postings, list(seq), t)


def test_find_nen_fig1(fig1_ctx):
    provider = _label_provider(fig1_ctx, FIG1_SEQ, T)
    store = {}
    assert find_nen(provider, store, S, 1, 1) == (C, 17)
    assert find_nen(provider, store, S, 1, 2) == (A, 20)
    assert find_nen(provider, store, S, 1, 3) is None


def test_find_nen_singleton_category(fig1_ctx):
    cm = fig1_ctx.categories
    cm.categories.append("solo")
    cm.members["solo"] = [E]
    try:
        provider = _label_provider(fig1_ctx, ["solo"], T)
        assert find_nen(provider, {}, S, 1, 1) == (E, 14 + 7)
    finally:
        cm.categories.remove("solo")
        del cm.members["solo"]
        fig1_ctx.postings.pop("solo", None)


@pytest.mark.parametrize("seed", range(10))
def test_find_nen_matches_estimate_order(seed):
    g, cm, q = random_instance(seed + 200)
    ctx = make_ctx(g, cm)
    rng = random.Random(seed)
    t = q.t
    for c in cm.categories:
        provider = _label_provider(ctx, [c], t)
        store = {}
        for v in rng.sample(range(g.vertex_count), min(6, g.vertex_count)):
            expect = estimated_sequence(g, v, t, cm.members[c])
            got = []
            x = 1
            while (r := find_nen(provider, store, v, 1, x)) is not None:
                got.append(r)
                x += 1
            assert got == expect, (seed, c, v)


# ---------------------------------------------------------------------------
# Plain-search nearest neighbors.


def test_dijkstra_nn_matches_find_nn_on_fig1(fig1_ctx):
    g, cm = fig1_ctx.graph, fig1_ctx.categories
    idx = fig1_ctx.labels
    for c in cm.categories:
        il = fig1_ctx.get_postings(c)
        for v in range(8):
            store = CursorStore()
            for x in range(1, 5):
                assert dijkstra_nn(g, cm, v, c, x) == find_nn(store, idx, il, v, c, x)


def test_dijkstra_nn_own_vertex(fig1_ctx):
    g, cm = fig1_ctx.graph, fig1_ctx.categories
    assert dijkstra_nn(g, cm, A, "MA", 1) == (A, 0)


def test_dijkstra_nn_exhaustion():
    from kosr.graph import CategoryMap, Graph

    g = Graph.from_arcs(4, [(0, 1, 1)])  # 2,3 unreachable from 0
    cm = CategoryMap.from_pairs(4, [(1, "c"), (2, "c"), (3, "c")])
    assert dijkstra_nn(g, cm, 0, "c", 1) == (1, 1)
    assert dijkstra_nn(g, cm, 0, "c", 2) is None


# ---------------------------------------------------------------------------
# Oracle equivalence and counters over random instances.


def test_oracle_guard():
    g, cm, _q = random_instance(0)
    import kosr.engines as eng

    old = eng.ORACLE_ENUMERATION_GUARD
    eng.ORACLE_ENUMERATION_GUARD = 1
    try:
        seq = [cm.categories[0], cm.categories[0]]
        if len(cm.members[seq[0]]) > 1:
            with pytest.raises(ValueError):
                oracle_topk(g, cm, 0, 1, seq, 1)
    finally:
        eng.ORACLE_ENUMERATION_GUARD = old


def test_oracle_k_zero(fig1_ctx):
    assert oracle_topk(fig1_ctx.graph, fig1_ctx.categories, S, T, FIG1_SEQ, 0) == []


def test_oracle_matches_independent_brute_force(fig1_ctx):
    got = oracle_topk(fig1_ctx.graph, fig1_ctx.categories, S, T, FIG1_SEQ, 5)
    expect = brute_force_topk(fig1_ctx.graph, fig1_ctx.categories, S, T, FIG1_SEQ, 5)
    assert [(w.cost, w.vertices) for w in got] == expect


@pytest.mark.parametrize("seed", range(25))
def test_engines_match_oracle(seed):
    g, cm, q = random_instance(seed)
    ctx = make_ctx(g, cm)
    expect = oracle_topk(g, cm, q.s, q.t, list(q.seq), q.k)
    assert [(w.cost, w.vertices) for w in expect] == brute_force_topk(g, cm, q.s, q.t, q.seq, q.k)
    m_bound, n_bound = search_space_bounds(cm, q.seq, q.k)
    stats_by_engine = {}
    for name, fn in ENGINES.items():
        results, stats = fn(ctx, q.s, q.t, list(q.seq), q.k)
        assert results == expect, (seed, name)
        assert len({w.vertices for w in results}) == len(results)
        stats_by_engine[name] = stats
        if name in ("pk", "pk-dij"):
            assert stats.examined_routes <= m_bound, (seed, name)
            assert stats.extended_routes <= n_bound, (seed, name)
    # the plain-search variants examine the same routes and issue the same
    # number of nearest-neighbor queries as the indexed ones
    for base in ("kpne", "pk", "sk"):
        assert stats_by_engine[base].examined_routes == stats_by_engine[base + "-dij"].examined_routes
        assert stats_by_engine[base].nn_queries == stats_by_engine[base + "-dij"].nn_queries


@pytest.mark.parametrize("seed", range(12))
def test_star_kosr_invariants(seed):
    g, cm, q = random_instance(seed + 70)
    ctx = make_ctx(g, cm)
    trace = []
    results, _ = star_kosr(ctx, q.s, q.t, list(q.seq), q.k, trace=trace)
    expect = oracle_topk(g, cm, q.s, q.t, list(q.seq), q.k)
    if expect:
        first_complete = next(ev for ev in trace if ev[0] == "result")
        assert first_complete[2] == expect[0].cost
    # admissibility: every inserted node's key bounds its best completion
    for ev in trace:
        if ev[0] != "insert":
            continue
        _, wit, key, _rank = ev
        best = best_completion_cost(g, cm, wit, list(q.seq), q.t)
        if best is not None:
            assert key <= best, (seed, wit)


@pytest.mark.parametrize("engine", ["pk", "sk"])
@pytest.mark.parametrize("seed", range(8))
def test_dominance_and_extraction_invariants(engine, seed):
    g, cm, q = random_instance(seed + 300)
    ctx = make_ctx(g, cm)
    trace = []
    ENGINES[engine](ctx, q.s, q.t, list(q.seq), q.k, trace=trace)
    dominating = {}
    last_key = None
    for ev in trace:
        kind = ev[0]
        if kind == "claim":
            _, wit, key = ev
            dominating[(wit[-1], len(wit))] = (wit, key)
        elif kind == "park":
            _, wit, key = ev
            dom_wit, dom_key = dominating[(wit[-1], len(wit))]
            assert dom_key <= key, (seed, wit)
            assert dom_wit != wit
        elif kind == "result":
            for i in range(1, len(ev[1]) - 1):
                slot = (ev[1][i], i + 1)
                if slot in dominating and dominating[slot][0] == ev[1][: i + 1]:
                    del dominating[slot]
            last_key = None  # keys may restart after re-adds
        elif kind == "pop":
            if last_key is not None:
                assert ev[2] >= last_key, (seed, ev)
            last_key = ev[2]


def test_results_are_nondecreasing_and_distinct(fig1_ctx):
    for name, fn in ENGINES.items():
        results, _ = fn(fig1_ctx, S, T, FIG1_SEQ, 10)
        costs = [w.cost for w in results]
        assert costs == sorted(costs)
        assert len({w.vertices for w in results}) == len(results)


def test_consecutive_categories_same_vertex():
    # A vertex carrying both consecutive categories serves them at cost 0.
    from kosr.graph import CategoryMap, Graph

    g = Graph.from_arcs(3, [(0, 1, 4), (1, 2, 6)])
    cm = CategoryMap.from_pairs(3, [(1, "x"), (1, "y")])
    ctx = make_ctx(g, cm)
    expect = oracle_topk(g, cm, 0, 2, ["x", "y"], 2)
    assert expect == [Witness((0, 1, 1, 2), 10)]
    for name, fn in ENGINES.items():
        results, _ = fn(ctx, 0, 2, ["x", "y"], 2)
        assert results == expect, name


def test_deadline_timeout():
    g, cm, _q = random_instance(9, num_vertices=60)
    ctx = make_ctx(g, cm)
    seq = [cm.categories[i % len(cm.categories)] for i in range(4)]
    with pytest.raises(QueryTimeout):
        kpne(ctx, 0, 1, seq, 50, deadline=time.monotonic() - 1.0)


def test_concurrent_queries_share_indexes():
    from concurrent.futures import ThreadPoolExecutor

    g, cm, _q = random_instance(55)
    ctx = make_ctx(g, cm)
    rng = random.Random(9)
    queries = [
        (
            rng.randrange(g.vertex_count),
            rng.randrange(g.vertex_count),
            [rng.choice(cm.categories) for _ in range(2)],
            rng.randint(1, 4),
        )
        for _ in range(20)
    ]

    def run(q):
        s, t, seq, k = q
        return star_kosr(ctx, s, t, seq, k)[0]

    serial = [run(q) for q in queries]
    with ThreadPoolExecutor(max_workers=4) as pool:
        threaded = list(pool.map(run, queries))
    assert threaded == serial


def test_stats_runtime_and_costs(fig1_ctx):
    results, stats = star_kosr(fig1_ctx, S, T, FIG1_SEQ, 3)
    assert stats.result_costs == [w.cost for w in results]
    assert stats.runtime >= 0.0
    assert stats.examined_routes > 0 and stats.extended_routes > 0 and stats.nn_queries > 0
