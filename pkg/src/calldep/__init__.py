"""calldep: call-graph dependency oracle over egypt-style dot dumps.

Parse per-file Graphviz call-graph dumps into an indexed edge database and
answer transitive dependency queries (callees, callers, per-file edges,
cut-off closures) with version-keyed memoization, over a CLI or HTTP.
"""

from .grammar import (
    EgSyntaxError,
    MissingStyleWarning,
    RawEdge,
    Token,
    format_eg,
    parse_eg,
    parse_text,
    tokenize,
)
from .ingest import IngestError, IngestReport, ParseFailure, ingest_path
from .reachability import ReachabilityEngine
from .service import (
    QueryError,
    QueryRequest,
    QueryResult,
    QueryService,
    render_result,
    serve,
)
from .snapshot import SnapshotError, load_snapshot, save_snapshot
from .store import CallEdge, CallGraph, GraphStats, Interner

__version__ = "0.1.0"

__all__ = [
    "CallEdge",
    "CallGraph",
    "EgSyntaxError",
    "GraphStats",
    "IngestError",
    "IngestReport",
    "Interner",
    "MissingStyleWarning",
    "ParseFailure",
    "QueryError",
    "QueryRequest",
    "QueryResult",
    "QueryService",
    "RawEdge",
    "ReachabilityEngine",
    "SnapshotError",
    "Token",
    "format_eg",
    "ingest_path",
    "load_snapshot",
    "parse_eg",
    "parse_text",
    "render_result",
    "save_snapshot",
    "serve",
    "tokenize",
    "__version__",
]
