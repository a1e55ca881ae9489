"""Query benchmark harness: batches of random queries per engine, with the
examined-route and nearest-neighbor-query counters as the headline metrics.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field

from .engines import ENGINES, QueryContext, QueryTimeout
from .fixtures import Query
from .graph import CategoryMap


@dataclass
class BenchParams:
    seq_len: int
    k: int
    engines: list[str]
    num_queries: int = 50
    seed: int = 0
    timeout_s: float = 60.0

    def __post_init__(self):
        if not self.engines:
            raise ValueError("engine list must not be empty")
        for e in self.engines:
            if e not in ENGINES:
                raise ValueError(f"unknown engine {e!r}")


@dataclass
class EngineRun:
    engine: str
    inf: bool = False
    examined: list[int] = field(default_factory=list)
    nn_queries: list[int] = field(default_factory=list)
    runtimes: list[float] = field(default_factory=list)
    cost_lists: list[list[int]] = field(default_factory=list)

    def mean_examined(self) -> float | None:
        return sum(self.examined) / len(self.examined) if self.examined else None

    def mean_nn(self) -> float | None:
        return sum(self.nn_queries) / len(self.nn_queries) if self.nn_queries else None

    def mean_runtime(self) -> float | None:
        return sum(self.runtimes) / len(self.runtimes) if self.runtimes else None


@dataclass
class BenchReport:
    params: BenchParams
    queries: list[Query]
    runs: dict[str, EngineRun]

    def text_lines(self) -> list[str]:
        """Human-readable key=value lines, including wall-clock timings."""
        lines = [
            f"seq_len={self.params.seq_len}",
            f"k={self.params.k}",
            f"num_queries={self.params.num_queries}",
            f"seed={self.params.seed}",
            f"timeout_s={self.params.timeout_s}",
        ]
        for name in self.params.engines:
            run = self.runs[name]
            if run.inf:
                lines.append(f"engine.{name}.runtime=INF")
            else:
                lines.append(f"engine.{name}.runtime={run.mean_runtime():.6f}")
            lines.append(f"engine.{name}.examined_routes={_fmt(run.mean_examined())}")
            lines.append(f"engine.{name}.nn_queries={_fmt(run.mean_nn())}")
        return lines

    def table_rows(self) -> list[list[str]]:
        """Deterministic tabular form: one row per (engine, query), without
        wall-clock fields, reproducible bit-for-bit for a fixed seed."""
        rows = [["engine", "query", "inf", "examined_routes", "nn_queries", "result_costs"]]
        for name in self.params.engines:
            run = self.runs[name]
            for qi in range(len(run.examined)):
                rows.append(
                    [
                        name,
                        str(qi),
                        "0",
                        str(run.examined[qi]),
                        str(run.nn_queries[qi]),
                        ",".join(map(str, run.cost_lists[qi])),
                    ]
                )
            if run.inf:
                rows.append([name, str(len(run.examined)), "1", "", "", ""])
        return rows


def _fmt(v: float | None) -> str:
    return "INF" if v is None else f"{v:.2f}"


def sample_queries(cm: CategoryMap, vertex_count: int, params: BenchParams) -> list[Query]:
    rng = random.Random(params.seed)
    cats = list(cm.categories)
    queries = []
    for _ in range(params.num_queries):
        if len(cats) >= params.seq_len:
            seq = tuple(rng.sample(cats, params.seq_len))
        else:
            seq = tuple(rng.choice(cats) for _ in range(params.seq_len))
        queries.append(Query(rng.randrange(vertex_count), rng.randrange(vertex_count), seq, params.k))
    return queries


def run_bench(ctx: QueryContext, params: BenchParams, queries: list[Query] | None = None) -> BenchReport:
    """Run every engine over the query batch; an engine that times out (or
    exhausts memory) on any query is flagged INF and stops early."""
    if queries is None:
        queries = sample_queries(ctx.categories, ctx.graph.vertex_count, params)
    runs: dict[str, EngineRun] = {}
    for name in params.engines:
        fn = ENGINES[name]
        run = EngineRun(name)
        runs[name] = run
        for q in queries:
            deadline = time.monotonic() + params.timeout_s
            try:
                witnesses, stats = fn(ctx, q.s, q.t, list(q.seq), q.k, deadline=deadline)
            except (QueryTimeout, MemoryError):
                run.inf = True
                break
            run.examined.append(stats.examined_routes)
            run.nn_queries.append(stats.nn_queries)
            run.runtimes.append(stats.runtime)
            run.cost_lists.append([w.cost for w in witnesses])
    return BenchReport(params, queries, runs)
