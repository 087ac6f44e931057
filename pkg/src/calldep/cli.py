"""Command-line entry point: ingest, query, serve, snapshot, bench.

Exit codes: 0 success (including empty answers), 1 usage problems,
2 input problems (unreadable roots, bad snapshots, malformed dumps,
unbindable ports).
"""

from __future__ import annotations

import argparse
import sys

from .bench import run_bench
from .ingest import IngestError, ingest_path
from .service import (
    DEFAULT_ANSWER_CAP,
    QUERY_KINDS,
    QueryError,
    QueryHTTPServer,
    QueryRequest,
    QueryService,
    render_result,
    report_lines,
    run_server,
)
from .snapshot import SnapshotError, load_snapshot, save_snapshot
from .store import CallGraph

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INPUT = 2


def _fail(message: str, code: int) -> int:
    print(f"calldep: {message}", file=sys.stderr)
    return code


def _stats_lines(graph: CallGraph) -> str:
    stats = graph.stats()
    return "\n".join(f"{name} {value}" for name, value in zip(stats._fields, stats)) + "\n"


def _add_source_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--ingest", metavar="DIR", help="build the graph from dumps under DIR")
    parser.add_argument("--snapshot", metavar="FILE", help="load the graph from a snapshot")
    parser.add_argument(
        "--mode", choices=("strict", "skip"), default="strict",
        help="ingest error handling (default strict)",
    )


def _load_graph(args: argparse.Namespace) -> CallGraph | None | int:
    """Graph from --snapshot or --ingest; None if neither; int = exit code."""
    if args.snapshot and args.ingest:
        return _fail("--snapshot and --ingest are mutually exclusive", EXIT_USAGE)
    if args.snapshot:
        try:
            return load_snapshot(args.snapshot)
        except SnapshotError as exc:
            return _fail(str(exc), EXIT_INPUT)
    if args.ingest:
        graph = CallGraph()
        try:
            ingest_path(graph, args.ingest, args.mode)
        except (IngestError, FileNotFoundError) as exc:
            return _fail(str(exc), EXIT_INPUT)
        return graph
    return None


# -- subcommands ------------------------------------------------------------


def cmd_ingest(args: argparse.Namespace) -> int:
    graph = CallGraph()
    try:
        report = ingest_path(graph, args.root, args.mode)
    except FileNotFoundError as exc:
        return _fail(str(exc), EXIT_INPUT)
    except IngestError as exc:
        print(report_lines(exc.report, graph.version), end="")
        return _fail(str(exc), EXIT_INPUT)
    print(report_lines(report, graph.version), end="")
    if args.save_snapshot:
        save_snapshot(graph, args.save_snapshot)
    return EXIT_OK


def cmd_query(args: argparse.Namespace) -> int:
    graph = _load_graph(args)
    if isinstance(graph, int):
        return graph
    if graph is None:
        return _fail("no graph loaded; pass --ingest DIR or --snapshot FILE", EXIT_USAGE)
    excluded = None
    if args.excluded is not None:
        excluded = tuple(part for part in args.excluded.split(",") if part)
    request = QueryRequest(
        kind=args.kind,
        subject=args.subject,
        target=args.target,
        excluded=excluded,
        mode=args.cutoff_mode,
        limit=args.limit,
        render=args.render,
    )
    service = QueryService(graph, answer_cap=args.answer_cap)
    try:
        result = service.handle(request)
    except QueryError as exc:
        return _fail(str(exc), EXIT_USAGE)
    sys.stdout.write(render_result(request, result))
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    graph = _load_graph(args)
    if isinstance(graph, int):
        return graph
    if graph is None:
        graph = CallGraph()  # start empty; /admin/ingest can fill it
    service = QueryService(graph, answer_cap=args.answer_cap)
    try:
        server = QueryHTTPServer((args.addr, args.port), service)
    except OSError as exc:
        return _fail(f"cannot bind {args.addr}:{args.port}: {exc}", EXIT_INPUT)
    host, port = server.server_address[:2]
    print(f"listening on http://{host}:{port}", flush=True)
    run_server(server)
    return EXIT_OK


def cmd_snapshot(args: argparse.Namespace) -> int:
    if args.action == "save":
        if not args.ingest:
            return _fail("snapshot save needs --ingest DIR", EXIT_USAGE)
        graph = CallGraph()
        try:
            ingest_path(graph, args.ingest, args.mode)
        except (IngestError, FileNotFoundError) as exc:
            return _fail(str(exc), EXIT_INPUT)
        size = save_snapshot(graph, args.path)
        print(f"saved {size}")
        print(_stats_lines(graph), end="")
        return EXIT_OK
    try:
        graph = load_snapshot(args.path)
    except SnapshotError as exc:
        return _fail(str(exc), EXIT_INPUT)
    print(_stats_lines(graph), end="")
    return EXIT_OK


def cmd_bench(args: argparse.Namespace) -> int:
    if args.snapshot and args.ingest:
        return _fail("--snapshot and --ingest are mutually exclusive", EXIT_USAGE)
    try:
        if args.snapshot:
            report = run_bench(graph=load_snapshot(args.snapshot), seed=args.seed)
        elif args.ingest:
            report = run_bench(root=args.ingest, seed=args.seed)
        else:
            report = run_bench(scale=args.scale, seed=args.seed)
    except (ValueError, SnapshotError, IngestError, FileNotFoundError) as exc:
        return _fail(str(exc), EXIT_INPUT)
    sys.stdout.write(report.format_table())
    return EXIT_OK


# -- parser ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="calldep",
        description="Call-graph dependency oracle over egypt-style dot dumps.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse .eg/.dot dumps under a directory")
    p.add_argument("root", help="directory to walk")
    p.add_argument("--mode", choices=("strict", "skip"), default="strict")
    p.add_argument(
        "--save-snapshot", metavar="FILE", help="also save the ingested graph"
    )
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("query", help="answer a single query")
    p.add_argument("kind", choices=QUERY_KINDS)
    p.add_argument("subject", nargs="?", help="function or file, per kind")
    p.add_argument("target", nargs="?", help="destination function (reachable)")
    _add_source_flags(p)
    p.add_argument("--excluded", metavar="a,b,c", help="cutoff exclusion set")
    p.add_argument("--cutoff-mode", choices=("filter", "barrier"))
    p.add_argument("--render", choices=("structured", "html"), default="structured")
    p.add_argument("--limit", type=int, help="row count for kind=top")
    p.add_argument("--answer-cap", type=int, default=DEFAULT_ANSWER_CAP)
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("serve", help="run the query server")
    p.add_argument("--addr", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8377)
    p.add_argument("--answer-cap", type=int, default=DEFAULT_ANSWER_CAP)
    _add_source_flags(p)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("snapshot", help="save or load a binary snapshot")
    p.add_argument("action", choices=("save", "load"))
    p.add_argument("path")
    p.add_argument("--ingest", metavar="DIR", help="graph source for save")
    p.add_argument(
        "--mode", choices=("strict", "skip"), default="strict",
        help="ingest error handling for save",
    )
    p.set_defaults(func=cmd_snapshot)

    p = sub.add_parser("bench", help="run the indexed-vs-scan benchmark grid")
    p.add_argument("--ingest", metavar="DIR", help="bench a real dump tree")
    p.add_argument("--snapshot", metavar="FILE", help="bench a saved graph")
    p.add_argument("--scale", type=int, default=2000,
                   help="synthetic edge count (scan uncached grows quadratically)")
    p.add_argument("--seed", type=int, default=7)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        return args.func(args)
    except KeyboardInterrupt:
        return 130
    except BrokenPipeError:
        return EXIT_OK


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
