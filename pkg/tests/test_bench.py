import pytest

from kosr.bench import BenchParams, run_bench, sample_queries
from kosr.engines import QueryContext
from kosr.fixtures import random_instance
from kosr.inverted import build_all_inverted
from kosr.labels import build_labels


def _ctx(g, cm):
    idx = build_labels(g)
    return QueryContext(g, cm, labels=idx, postings=build_all_inverted(idx, cm))


def test_fig1_single_query_sk_not_worse(fig1_ctx):
    params = BenchParams(seq_len=3, k=2, engines=["pk", "sk"], num_queries=1, seed=12)
    from kosr.fixtures import Query

    queries = [Query(0, 7, ("MA", "RE", "CI"), 2)]
    report = run_bench(fig1_ctx, params, queries=queries)
    assert report.runs["sk"].examined[0] <= report.runs["pk"].examined[0]
    assert report.runs["sk"].cost_lists == report.runs["pk"].cost_lists


def test_bench_reproducible_rows():
    g, cm, _q = random_instance(31)
    ctx = _ctx(g, cm)
    params = BenchParams(seq_len=2, k=3, engines=["kpne", "pk", "sk"], num_queries=5, seed=9)
    first = run_bench(ctx, params)
    second = run_bench(ctx, params)
    assert first.table_rows() == second.table_rows()
    assert len(first.queries) == 5
    # accounting: one row per engine per completed query, plus the header
    assert len(first.table_rows()) == 1 + 3 * 5


def test_engines_agree_in_batch():
    g, cm, _q = random_instance(32)
    ctx = _ctx(g, cm)
    params = BenchParams(seq_len=2, k=3, engines=["kpne", "pk", "sk"], num_queries=6, seed=2)
    report = run_bench(ctx, params)
    assert report.runs["kpne"].cost_lists == report.runs["pk"].cost_lists == report.runs["sk"].cost_lists


def test_forced_timeout_flags_inf():
    g, cm, _q = random_instance(33, num_vertices=60)
    ctx = _ctx(g, cm)
    seq_len = min(4, len(cm.categories))
    params = BenchParams(
        seq_len=seq_len, k=50, engines=["kpne"], num_queries=3, seed=4, timeout_s=0.0
    )
    report = run_bench(ctx, params)
    assert report.runs["kpne"].inf
    text = "\n".join(report.text_lines())
    assert "engine.kpne.runtime=INF" in text
    rows = report.table_rows()
    assert rows[-1][2] == "1"  # INF marker row


def test_fifty_query_batch_records_all():
    g, cm, _q = random_instance(34)
    ctx = _ctx(g, cm)
    params = BenchParams(seq_len=2, k=2, engines=["sk"], num_queries=50, seed=8)
    report = run_bench(ctx, params)
    assert len(report.queries) == 50
    assert len(report.runs["sk"].examined) == 50
    assert len(report.runs["sk"].cost_lists) == 50


def test_bad_params():
    with pytest.raises(ValueError):
        BenchParams(seq_len=2, k=1, engines=[])
    with pytest.raises(ValueError):
        BenchParams(seq_len=2, k=1, engines=["warp"])


def test_sample_queries_deterministic(fig1_ctx):
    params = BenchParams(seq_len=3, k=2, engines=["sk"], num_queries=4, seed=77)
    a = sample_queries(fig1_ctx.categories, 8, params)
    b = sample_queries(fig1_ctx.categories, 8, params)
    assert a == b
    assert all(len(q.seq) == 3 for q in a)
