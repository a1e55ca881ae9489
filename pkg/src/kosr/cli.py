"""Command-line surface: build, query, update, bench.

Results go to stdout, statistics to stderr.  Exit codes: 0 success, 1 user
error (bad arguments, malformed input, unknown vertex or category), 2
internal error.  ``KOSR_INDEX_DIR`` supplies the default index directory.
"""

from __future__ import annotations

import argparse
import os
import sys
import time

from . import bench as bench_mod
from . import diskio
from .engines import ENGINES, QueryContext, QueryTimeout, Witness
from .fixtures import Query
from .graph import (
    CategoryError,
    CategoryMap,
    GraphFormatError,
    assign_uniform_categories,
    assign_zipf_categories,
    load_categories,
    load_graph,
)
from .inverted import build_all_inverted
from .labels import build_labels, expand_witness, load_labels


class UserError(Exception):
    pass


def _index_dir(args) -> str:
    d = args.index or os.environ.get("KOSR_INDEX_DIR")
    if not d:
        raise UserError("no index directory: pass --index or set KOSR_INDEX_DIR")
    return d


def cmd_build(args) -> int:
    gen_flags = sum(1 for f in (args.categories, args.gen_uniform, args.gen_zipf) if f)
    if gen_flags != 1:
        raise UserError("exactly one of --categories, --gen-uniform, --gen-zipf is required")
    started = time.perf_counter()
    try:
        with open(args.graph) as fh:
            graph, remap = load_graph(fh, directed=not args.undirected)
    except OSError as exc:
        raise UserError(f"cannot read graph file: {exc}") from None
    if args.categories:
        try:
            with open(args.categories) as fh:
                cm = load_categories(fh, remap, graph.vertex_count)
        except OSError as exc:
            raise UserError(f"cannot read category file: {exc}") from None
    elif args.gen_uniform:
        num, size = args.gen_uniform
        cm = assign_uniform_categories(graph, num, size, args.seed)
    else:
        num, factor = args.gen_zipf
        cm = assign_zipf_categories(graph, int(num), factor, args.seed)
    labels = build_labels(graph)
    postings = build_all_inverted(labels, cm)
    os.makedirs(args.out, exist_ok=True)
    diskio.acquire_writer_lock(args.out)
    try:
        manifest = diskio.write_index_dir(args.out, graph, remap, cm, labels, postings)
    finally:
        diskio.release_writer_lock(args.out)
    elapsed = time.perf_counter() - started
    n = max(1, graph.vertex_count)
    avg_in = int(labels.in_indptr[-1]) / n
    avg_out = int(labels.out_indptr[-1]) / n
    posting_entries = sum(
        len(lst) for il in postings.values() for lst in il.postings.values()
    )
    print(f"build_time_s={elapsed:.3f}")
    print(f"vertices={graph.vertex_count} arcs={graph.arc_count}")
    print(f"avg_label_in={avg_in:.2f} avg_label_out={avg_out:.2f}")
    print(f"categories={len(cm.categories)} inverted_entries={posting_entries}")
    print(f"payload_bytes={manifest['payload_length']}")
    return 0


def _resolve_vertex(remap, token: str) -> int:
    v = remap.index.get(token)
    if v is None:
        raise UserError(f"unknown vertex {token!r}")
    return v


def _print_results(results: list[Witness], remap, expand_paths: list[list[int]] | None) -> None:
    out = sys.stdout
    for rank, w in enumerate(results, start=1):
        names = ",".join(remap.labels[v] for v in w.vertices)
        out.write(f"{rank} {w.cost} {names}\n")
        if expand_paths is not None:
            route = ",".join(remap.labels[v] for v in expand_paths[rank - 1])
            out.write(f"{rank} route {route}\n")
    out.flush()


def cmd_query(args) -> int:
    dirpath = _index_dir(args)
    diskio.ensure_no_writer(dirpath)
    if args.k < 1:
        raise UserError("k must be >= 1")
    seq = [c for c in args.categories.split(",") if c]
    if not seq:
        raise UserError("category sequence must be non-empty")
    engine = ENGINES.get(args.engine)
    if engine is None:
        raise UserError(f"unknown engine {args.engine!r}")
    remap = diskio.load_remap(dirpath)
    s = _resolve_vertex(remap, args.source)
    t = _resolve_vertex(remap, args.dest)

    segment_opens = None
    if args.engine.endswith("-dij"):
        graph = diskio.load_graph_binary(os.path.join(dirpath, "graph.bin"))
        with open(os.path.join(dirpath, "categories.txt")) as fh:
            cm = load_categories(fh, remap, graph.vertex_count)
        ctx = QueryContext(graph, cm)
        results, stats = engine(ctx, s, t, seq, args.k)
        idx_for_expand = lambda: load_labels(os.path.join(dirpath, "labels.bin"))  # noqa: E731
    elif args.mode == "mem":
        mem = diskio.MemIndex.load(dirpath)
        ctx = QueryContext(mem.graph, mem.cm, labels=mem.labels, postings=mem.postings)
        results, stats = engine(ctx, s, t, seq, args.k)
        idx_for_expand = lambda: mem.labels  # noqa: E731
    else:
        access, postings, members, disk = diskio.open_disk_query(dirpath, s, t, seq)
        cm = CategoryMap.empty(disk.vertex_count, disk.categories())
        for c, mem_list in members.items():
            cm.members[c] = list(mem_list)
            for v in mem_list:
                cm.vertex_categories[v].add(c)
        ctx = QueryContext(None, cm, labels=access, postings=postings, vertex_count=disk.vertex_count)
        results, stats = engine(ctx, s, t, seq, args.k)
        segment_opens = disk.opens + 1  # plus the result buffer flush
        disk.close()
        idx_for_expand = lambda: load_labels(os.path.join(dirpath, "labels.bin"))  # noqa: E731

    expand_paths = None
    if args.expand:
        idx = idx_for_expand()
        expand_paths = [expand_witness(idx, w.vertices) for w in results]
    _print_results(results, remap, expand_paths)
    if args.stats:
        err = sys.stderr
        err.write(f"engine={args.engine} mode={args.mode}\n")
        err.write(
            f"examined_routes={stats.examined_routes} extended_routes={stats.extended_routes} "
            f"nn_queries={stats.nn_queries} runtime_s={stats.runtime:.6f}\n"
        )
        if segment_opens is not None:
            err.write(f"segment_opens={segment_opens}\n")
    return 0


def cmd_update(args) -> int:
    dirpath = _index_dir(args)
    remap = diskio.load_remap(dirpath)
    v = _resolve_vertex(remap, args.vertex)
    diskio.acquire_writer_lock(dirpath)
    try:
        changed = diskio.apply_category_update(dirpath, args.op, v, args.category)
    finally:
        diskio.release_writer_lock(dirpath)
    if not changed:
        sys.stderr.write(
            f"warning: {args.op} {args.vertex} {args.category} was a no-op\n"
        )
    return 0


def cmd_bench(args) -> int:
    dirpath = _index_dir(args)
    diskio.ensure_no_writer(dirpath)
    engines = [e for e in args.engines.split(",") if e]
    params = bench_mod.BenchParams(
        seq_len=args.seq_len,
        k=args.k,
        engines=engines,
        num_queries=args.queries,
        seed=args.seed,
        timeout_s=args.timeout,
    )
    mem = diskio.MemIndex.load(dirpath)
    ctx = QueryContext(mem.graph, mem.cm, labels=mem.labels, postings=mem.postings)
    report = bench_mod.run_bench(ctx, params)
    prefix = args.out_prefix
    with open(prefix + ".txt", "w") as fh:
        fh.write("\n".join(report.text_lines()) + "\n")
    with open(prefix + ".tsv", "w") as fh:
        for row in report.table_rows():
            fh.write("\t".join(row) + "\n")
    print(f"report written to {prefix}.txt and {prefix}.tsv")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="kosr", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", help="build indexes from a graph and categories")
    b.add_argument("--graph", required=True, help="edge list file (u v w / DIMACS arcs)")
    b.add_argument("--undirected", action="store_true", help="expand records into both arcs")
    b.add_argument("--categories", help="membership file with 'v c' lines")
    b.add_argument("--gen-uniform", nargs=2, type=int, metavar=("NUM", "SIZE"))
    b.add_argument("--gen-zipf", nargs=2, type=float, metavar=("NUM", "FACTOR"))
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--out", required=True, help="index directory to create")
    b.set_defaults(fn=cmd_build)

    q = sub.add_parser("query", help="answer one top-k sequenced route query")
    q.add_argument("--index", help="index directory (default $KOSR_INDEX_DIR)")
    q.add_argument("source")
    q.add_argument("dest")
    q.add_argument("categories", help="comma-separated category sequence")
    q.add_argument("k", type=int)
    q.add_argument("--engine", default="sk", choices=sorted(ENGINES))
    q.add_argument("--mode", default="mem", choices=("mem", "disk"))
    q.add_argument("--expand", action="store_true", help="also print the full routes")
    q.add_argument("--stats", action="store_true", help="print counters to stderr")
    q.set_defaults(fn=cmd_query)

    u = sub.add_parser("update", help="add or remove one vertex-category membership")
    u.add_argument("--index")
    u.add_argument("op", choices=("add", "remove"))
    u.add_argument("vertex")
    u.add_argument("category")
    u.set_defaults(fn=cmd_update)

    m = sub.add_parser("bench", help="run a query benchmark batch")
    m.add_argument("--index")
    m.add_argument("--seq-len", type=int, required=True)
    m.add_argument("--k", type=int, required=True)
    m.add_argument("--engines", required=True, help="comma-separated engine names")
    m.add_argument("--queries", type=int, default=50)
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--timeout", type=float, default=60.0)
    m.add_argument("--out-prefix", required=True)
    m.set_defaults(fn=cmd_bench)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code else 0
    try:
        return args.fn(args)
    except (UserError, GraphFormatError, CategoryError, ValueError, diskio.IndexDirError, FileNotFoundError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except QueryTimeout as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except Exception as exc:  # pragma: no cover - defensive
        sys.stderr.write(f"internal error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
