"""Benchmark harness: indexed vs scan-only lookups, caching on vs off.

Every measured query runs in several variants that must agree on the answer
and differ only in cost:

  indexing  indexed   adjacency comes from the store's forward/reverse maps
            scan      adjacency is recomputed by scanning a flat (caller,
                      callee) pair list on every step, the no-index baseline
  caching   cached    closure sets are memoized and spliced during traversal
            uncached  every traversal starts from nothing

The synthetic workload is segmented: call chains stay inside medium-sized
segments so closure sizes stay bounded, while a designated hub function is
called from most segments and so has a very large backward closure - the
shape that makes cold-vs-warm and indexed-vs-scan differences visible.
Beware the scan x uncached full-closure cell: its cost grows quadratically
with edge count, so keep --scale modest when you ask for the full grid.
"""

from __future__ import annotations

import random
import tempfile
import time
from dataclasses import dataclass
from pathlib import Path

from .grammar import RawEdge, STYLE_DOTTED, STYLE_SOLID, format_eg, parse_text
from .ingest import discover_inputs, file_tag, ingest_path
from .reachability import ReachabilityEngine, finish_order
from .store import CallGraph

HUB_NAME = "hub_entry"


# -- synthetic workload ---------------------------------------------------------


@dataclass
class SyntheticGraph:
    edges_by_file: dict[str, list[RawEdge]]
    hub: str

    def all_edges(self) -> list[RawEdge]:
        return [edge for edges in self.edges_by_file.values() for edge in edges]


def synthetic_graph(
    target_edges: int,
    seed: int,
    segment_size: int = 24,
    file_count: int | None = None,
) -> SyntheticGraph:
    """Seeded random call graph of roughly `target_edges` raw edges.

    Nodes are grouped into segments; edges mostly point forward within the
    segment (bounding closure sizes), a few point backward (cycles), some
    are self-loops, and many nodes call the shared hub. A small fraction of
    edges repeats verbatim to exercise multiplicity counting.
    """
    if target_edges < 1:
        raise ValueError("target_edges must be positive")
    rng = random.Random(seed)
    node_count = max(segment_size, target_edges // 10)
    out_degree = max(1.0, target_edges / node_count - 0.25)
    names = [f"fn_{i:06d}" for i in range(node_count)]

    def style() -> str:
        return STYLE_DOTTED if rng.random() < 0.07 else STYLE_SOLID

    stream: list[tuple[str, str, str]] = []
    for g, name in enumerate(names):
        segment_start = g - g % segment_size
        segment_end = min(segment_start + segment_size, node_count)
        later = range(g + 1, segment_end)
        want = min(len(later), max(0, round(rng.gauss(out_degree, out_degree / 3))))
        for target in rng.sample(later, want):
            stream.append((name, names[target], style()))
        if rng.random() < 0.18:
            stream.append((name, HUB_NAME, style()))
        if g > segment_start and rng.random() < 0.03:
            back = rng.randrange(segment_start, g)
            stream.append((name, names[back], style()))
        if rng.random() < 0.01:
            stream.append((name, name, STYLE_SOLID))
        if stream and rng.random() < 0.02:
            stream.append(stream[-1])

    # nodes near segment ends have few forward targets, which leaves the
    # stream short of target_edges; top up with more of the same shapes
    while len(stream) < target_edges:
        g = rng.randrange(node_count)
        segment_start = g - g % segment_size
        segment_end = min(segment_start + segment_size, node_count)
        if g + 1 < segment_end and rng.random() > 0.15:
            stream.append((names[g], names[rng.randrange(g + 1, segment_end)], style()))
        else:
            stream.append((names[g], HUB_NAME, style()))

    if file_count is None:
        file_count = max(1, target_edges // 50)
    file_count = min(file_count, max(1, len(stream)))
    per_file = -(-len(stream) // file_count)  # ceil
    edges_by_file: dict[str, list[RawEdge]] = {}
    for index in range(file_count):
        tag = f"synth/unit_{index:04d}"
        chunk = stream[index * per_file : (index + 1) * per_file]
        edges_by_file[tag] = [
            RawEdge(source, dest, st, tag) for source, dest, st in chunk
        ]
    return SyntheticGraph(edges_by_file=edges_by_file, hub=HUB_NAME)


def write_eg_tree(root: str | Path, graph: SyntheticGraph) -> list[Path]:
    """Materialize the synthetic graph as .eg files under `root`."""
    root = Path(root)
    written = []
    for tag, edges in graph.edges_by_file.items():
        path = root / f"{tag}.eg"
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(format_eg(edges))
        written.append(path)
    return written


# -- scan-only baseline ---------------------------------------------------------


def scan_callees(pairs: list[tuple[str, str]], name: str) -> list[str]:
    return [callee for caller, callee in pairs if caller == name]


def scan_callers(pairs: list[tuple[str, str]], name: str) -> list[str]:
    return [caller for caller, callee in pairs if callee == name]


def closure_bfs(start, neighbors, cache) -> frozenset[str]:
    """Worklist closure; pass a dict to splice/memoize, None to disable."""
    reached: set[str] = set()
    queued = {start}
    work = [start]
    while work:
        node = work.pop()
        for succ in neighbors(node):
            if succ in reached:
                continue
            reached.add(succ)
            spliced = cache.get(succ) if cache is not None else None
            if spliced is not None:
                reached |= spliced
            elif succ not in queued:
                queued.add(succ)
                work.append(succ)
    result = frozenset(reached)
    if cache is not None:
        cache[start] = result
    return result


def count_closures(nodes, neighbors, cached: bool) -> int:
    """Reachable-pair count; with caching on, sources go in finish order so
    nearly every step splices a completed set."""
    cache: dict[str, frozenset[str]] | None = {} if cached else None
    if cached:
        order = finish_order(nodes, neighbors)
    else:
        order = nodes
    return sum(len(closure_bfs(name, neighbors, cache)) for name in order)


def _cache_bytes(cache: dict[str, frozenset[str]] | None) -> int:
    if not cache:
        return 0
    return len(cache) * 120 + sum(len(s) for s in cache.values()) * 40


# -- the grid -------------------------------------------------------------------


@dataclass(frozen=True)
class BenchRow:
    query: str
    indexing: str
    caching: str
    elapsed: float
    memory_estimate: int
    answer_count: int


@dataclass
class BenchReport:
    rows: list[BenchRow]

    def check_counts(self) -> None:
        by_query: dict[str, set[int]] = {}
        for row in self.rows:
            by_query.setdefault(row.query, set()).add(row.answer_count)
        for query, counts in by_query.items():
            if len(counts) != 1:
                raise RuntimeError(
                    f"bench variants disagree on {query!r}: {sorted(counts)}"
                )

    def format_table(self) -> str:
        header = ("query", "indexing", "caching", "elapsed_s", "memory_b", "answers")
        cells = [header]
        for row in self.rows:
            cells.append(
                (
                    row.query,
                    row.indexing,
                    row.caching,
                    f"{row.elapsed:.6f}",
                    str(row.memory_estimate),
                    str(row.answer_count),
                )
            )
        widths = [max(len(line[i]) for line in cells) for i in range(len(header))]
        lines = [
            "  ".join(cell.ljust(width) for cell, width in zip(line, widths)).rstrip()
            for line in cells
        ]
        return "\n".join(lines) + "\n"


def _timed(fn):
    started = time.perf_counter()
    result = fn()
    return result, time.perf_counter() - started


def pick_hub(graph: CallGraph) -> str:
    """Most directly-called function: the closest thing to kmalloc here."""
    indegree: dict[str, int] = {}
    for caller, callee, _file, _style, _mult in graph.edge_items():
        indegree[callee] = indegree.get(callee, 0) + 1
    if not indegree:
        raise ValueError("graph has no edges to benchmark")
    return min(indegree.items(), key=lambda item: (-item[1], item[0]))[0]


def run_bench(
    *,
    graph: CallGraph | None = None,
    root: str | Path | None = None,
    scale: int = 2000,
    seed: int = 7,
) -> BenchReport:
    """Measure the full variant grid and return the table.

    Input selection: an existing `graph` (no ingest rows), a directory of
    dumps via `root`, or - default - a synthetic graph of `scale` edges
    written to a temp tree so ingest is measured like any other corpus.
    """
    rows: list[BenchRow] = []
    hub: str | None = None
    tmp: tempfile.TemporaryDirectory | None = None
    try:
        if graph is None:
            if root is None:
                tmp = tempfile.TemporaryDirectory(prefix="calldep-bench-")
                synthetic = synthetic_graph(scale, seed)
                write_eg_tree(tmp.name, synthetic)
                root = tmp.name
                hub = synthetic.hub
            root = Path(root)

            graph = CallGraph()
            report, ingest_elapsed = _timed(lambda: ingest_path(graph, root))
            rows.append(
                BenchRow(
                    "ingest", "indexed", "-", ingest_elapsed,
                    graph.memory_estimate(), report.edges_emitted,
                )
            )

            def parse_only() -> list[RawEdge]:
                edges: list[RawEdge] = []
                for path in discover_inputs(root):
                    text = path.read_bytes().decode("latin-1")
                    edges.extend(parse_text(text, file_tag(root, path)))
                return edges

            flat, scan_elapsed = _timed(parse_only)
            rows.append(
                BenchRow(
                    "ingest", "scan", "-", scan_elapsed,
                    len(flat) * 100, len(flat),
                )
            )

        if hub is None:
            hub = pick_hub(graph)
        store_bytes = graph.memory_estimate()
        nodes = graph.functions()
        pairs = graph.name_pairs()
        pair_bytes = len(pairs) * 100

        # edge enumeration: walk every stored edge fact and count it
        stored = graph.edge_items()
        _, elapsed = _timed(lambda: sum(1 for _ in graph.edge_items()))
        rows.append(
            BenchRow("edge_enum", "indexed", "-", elapsed, store_bytes, len(stored))
        )
        flat_rows = list(stored)
        _, elapsed = _timed(lambda: sum(1 for _ in flat_rows))
        rows.append(
            BenchRow("edge_enum", "scan", "-", elapsed,
                     len(flat_rows) * 100, len(flat_rows))
        )

        # full-closure materialization over every function
        engine = ReachabilityEngine(graph)
        count, elapsed = _timed(engine.closure_edge_count)
        rows.append(
            BenchRow("full_closure", "indexed", "cached", elapsed,
                     store_bytes + engine.cache_memory_estimate(), count)
        )
        with graph.read_lock():
            count, elapsed = _timed(
                lambda: count_closures(nodes, graph.forward_neighbors, cached=False)
            )
        rows.append(
            BenchRow("full_closure", "indexed", "uncached", elapsed, store_bytes, count)
        )
        scan_fwd = lambda name: scan_callees(pairs, name)
        scan_cache: dict[str, frozenset[str]] = {}
        count, elapsed = _timed(
            lambda: sum(
                len(closure_bfs(n, scan_fwd, scan_cache))
                for n in finish_order(nodes, scan_fwd)
            )
        )
        rows.append(
            BenchRow("full_closure", "scan", "cached", elapsed,
                     pair_bytes + _cache_bytes(scan_cache), count)
        )
        count, elapsed = _timed(
            lambda: count_closures(nodes, scan_fwd, cached=False)
        )
        rows.append(
            BenchRow("full_closure", "scan", "uncached", elapsed, pair_bytes, count)
        )

        # hub backward closure, cold then warm
        engine = ReachabilityEngine(graph)
        cold, cold_elapsed = _timed(lambda: engine.backward_closure(hub))
        warm, warm_elapsed = _timed(lambda: engine.backward_closure(hub))
        cache_bytes = engine.cache_memory_estimate()
        rows.append(
            BenchRow("backward_cold", "indexed", "cached", cold_elapsed,
                     store_bytes + cache_bytes, len(cold))
        )
        rows.append(
            BenchRow("backward_warm", "indexed", "cached", warm_elapsed,
                     store_bytes + cache_bytes, len(warm))
        )
        with graph.read_lock():
            for label in ("backward_cold", "backward_warm"):
                result, elapsed = _timed(
                    lambda: closure_bfs(hub, graph.reverse_neighbors, None)
                )
                rows.append(
                    BenchRow(label, "indexed", "uncached", elapsed,
                             store_bytes, len(result))
                )
        scan_rev = lambda name: scan_callers(pairs, name)
        rev_cache: dict[str, frozenset[str]] = {}
        result, elapsed = _timed(lambda: closure_bfs(hub, scan_rev, rev_cache))
        rows.append(
            BenchRow("backward_cold", "scan", "cached", elapsed,
                     pair_bytes + _cache_bytes(rev_cache), len(result))
        )
        result, elapsed = _timed(
            lambda: rev_cache[hub] if hub in rev_cache
            else closure_bfs(hub, scan_rev, rev_cache)
        )
        rows.append(
            BenchRow("backward_warm", "scan", "cached", elapsed,
                     pair_bytes + _cache_bytes(rev_cache), len(result))
        )
        for label in ("backward_cold", "backward_warm"):
            result, elapsed = _timed(lambda: closure_bfs(hub, scan_rev, None))
            rows.append(
                BenchRow(label, "scan", "uncached", elapsed, pair_bytes, len(result))
            )
    finally:
        if tmp is not None:
            tmp.cleanup()

    report = BenchReport(rows=rows)
    report.check_counts()
    return report
