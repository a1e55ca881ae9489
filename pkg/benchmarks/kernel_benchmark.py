#!/usr/bin/env python3
"""Compare the compiled and pure-Python kernel backends.

Times label-index construction and a batch of exact-distance joins on a
synthetic hub-structured graph, once per available backend, and prints a
small table.  Run from a checkout:

    python benchmarks/kernel_benchmark.py --vertices 20000 --queries 200000
"""

from __future__ import annotations

import argparse
import random
import time

import numpy as np

from kosr import kernels
from kosr.fixtures import bench_graph
from kosr.labels import default_landmark_order


def time_backend(name: str, g, order, num_queries: int, seed: int) -> dict:
    impl = kernels.get_backend(name)
    t0 = time.perf_counter()
    arrays = impl.build_label_arrays(
        g.vertex_count, g.indptr, g.heads, g.weights,
        g.rindptr, g.rheads, g.rweights, order, g.undirected,
    )
    build_s = time.perf_counter() - t0
    in_indptr, in_hubs, in_dists, _ip, out_indptr, out_hubs, out_dists, _op = arrays
    rng = random.Random(seed)
    pairs = [(rng.randrange(g.vertex_count), rng.randrange(g.vertex_count)) for _ in range(num_queries)]
    t0 = time.perf_counter()
    checksum = 0
    for s, t in pairs:
        d = impl.dist_join(out_indptr, out_hubs, out_dists, in_indptr, in_hubs, in_dists, s, t)
        checksum ^= d
    query_s = time.perf_counter() - t0
    return {
        "backend": name,
        "build_s": build_s,
        "query_s": query_s,
        "queries_per_s": num_queries / query_s if query_s else float("inf"),
        "label_entries": int(in_indptr[-1]),
        "checksum": checksum,
        "arrays": arrays,
    }


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--vertices", type=int, default=20000)
    ap.add_argument("--queries", type=int, default=100000)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()

    g = bench_graph(args.vertices, args.seed)
    order = default_landmark_order(g)
    print(f"graph: {g.vertex_count} vertices, {g.arc_count} arcs (undirected)")

    rows = []
    for name in kernels.available_backends():
        rows.append(time_backend(name, g, order, args.queries, args.seed))

    if len(rows) == 2:
        same = all(np.array_equal(a, b) for a, b in zip(rows[0]["arrays"], rows[1]["arrays"]))
        agree = rows[0]["checksum"] == rows[1]["checksum"]
        print(f"backends produce identical indexes: {same}; identical distances: {agree}")

    header = f"{'backend':<14} {'build_s':>10} {'query_s':>10} {'queries/s':>12} {'entries':>10}"
    print(header)
    print("-" * len(header))
    for r in rows:
        print(
            f"{r['backend']:<14} {r['build_s']:>10.3f} {r['query_s']:>10.3f} "
            f"{r['queries_per_s']:>12.0f} {r['label_entries']:>10}"
        )
    if len(rows) == 2:
        print(
            f"speedup: build x{rows[1]['build_s'] / rows[0]['build_s']:.1f}, "
            f"queries x{rows[0]['queries_per_s'] / rows[1]['queries_per_s']:.1f}"
        )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
