"""Top-k optimal sequenced route queries on directed weighted graphs."""

from .bench import BenchParams, BenchReport, run_bench
from .engines import (
    ENGINES,
    QueryContext,
    QueryStats,
    QueryTimeout,
    Witness,
    dijkstra_nn,
    find_nen,
    kpne,
    oracle_topk,
    pruning_kosr,
    star_kosr,
)
from .fixtures import Query, fixture_fig1, random_instance
from .graph import (
    CategoryError,
    CategoryMap,
    Graph,
    GraphFormatError,
    NegativeWeightError,
    VertexRemap,
    assign_uniform_categories,
    assign_zipf_categories,
    load_categories,
    load_graph,
)
from .inverted import (
    CursorStore,
    InvertedLabelIndex,
    add_vertex_category,
    build_inverted_index,
    find_nn,
    remove_vertex_category,
)
from .kernels import BACKEND
from .labels import LabelIndex, build_labels, dist, expand_witness, reconstruct_path

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BenchParams",
    "BenchReport",
    "CategoryError",
    "CategoryMap",
    "CursorStore",
    "ENGINES",
    "Graph",
    "GraphFormatError",
    "InvertedLabelIndex",
    "LabelIndex",
    "NegativeWeightError",
    "Query",
    "QueryContext",
    "QueryStats",
    "QueryTimeout",
    "VertexRemap",
    "Witness",
    "add_vertex_category",
    "assign_uniform_categories",
    "assign_zipf_categories",
    "build_inverted_index",
    "build_labels",
    "dijkstra_nn",
    "dist",
    "expand_witness",
    "find_nen",
    "find_nn",
    "fixture_fig1",
    "kpne",
    "load_categories",
    "load_graph",
    "oracle_topk",
    "pruning_kosr",
    "random_instance",
    "reconstruct_path",
    "run_bench",
    "star_kosr",
]
