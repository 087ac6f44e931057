"""Query service: validated request objects, dispatch, rendering, HTTP server.

The wire protocol is deliberately plain: one endpoint per query kind, query
parameters for the fields, and a structured-text response of one header line
followed by one answer per line. Anything that can parse lines can consume
it, including the bundled web client and shell scripts.

Every response carries the graph version its answer was computed against,
captured under the same read lock as the answer itself.
"""

from __future__ import annotations

import html
import threading
import time
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Sequence
from urllib.parse import parse_qsl, urlsplit

from .ingest import IngestError, IngestReport, ingest_path
from .reachability import ReachabilityEngine
from .snapshot import SnapshotError, load_snapshot, save_snapshot
from .store import CallGraph

DEFAULT_ANSWER_CAP = 100000

QUERY_KINDS = (
    "file",
    "source",
    "dest",
    "cutoff",
    "stats",
    "top",
    "reachable",
    "callees",
    "callers",
)
RENDERS = ("structured", "html")
CUTOFF_MODES = ("filter", "barrier")

# which optional fields each kind consumes; subject is handled separately
_FIELD_KINDS = {
    "excluded": {"cutoff"},
    "mode": {"cutoff"},
    "target": {"reachable"},
    "limit": {"top"},
}
_SUBJECT_KINDS = {"file", "source", "dest", "cutoff", "reachable", "callees", "callers"}


class QueryError(ValueError):
    """Request validation failure; `field` names the offending field."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


@dataclass(frozen=True)
class QueryRequest:
    kind: str
    subject: str | None = None
    target: str | None = None
    excluded: tuple[str, ...] | None = None
    mode: str | None = None
    limit: int | None = None
    render: str = "structured"

    def validate(self) -> None:
        if self.kind not in QUERY_KINDS:
            raise QueryError("kind", f"unknown query kind {self.kind!r}")
        if self.render not in RENDERS:
            raise QueryError("render", f"must be one of {', '.join(RENDERS)}")
        if self.kind in _SUBJECT_KINDS:
            if not self.subject:
                raise QueryError("subject", f"required for kind {self.kind!r}")
        elif self.subject is not None:
            raise QueryError("subject", f"not allowed for kind {self.kind!r}")
        if self.kind == "reachable" and not self.target:
            raise QueryError("target", "required for kind 'reachable'")
        for name in ("excluded", "mode", "target", "limit"):
            if getattr(self, name) is not None and self.kind not in _FIELD_KINDS[name]:
                raise QueryError(name, f"not allowed for kind {self.kind!r}")
        if self.mode is not None and self.mode not in CUTOFF_MODES:
            raise QueryError("mode", f"must be one of {', '.join(CUTOFF_MODES)}")
        if self.limit is not None and self.limit < 1:
            raise QueryError("limit", "must be a positive integer")


@dataclass(frozen=True)
class QueryResult:
    kind: str
    answers: list[str]
    count: int
    elapsed: float
    graph_version: int
    cached: bool
    truncated: bool = False


class QueryService:
    """Binds a graph and its reachability engine behind handle()."""

    def __init__(
        self,
        graph: CallGraph,
        engine: ReachabilityEngine | None = None,
        answer_cap: int = DEFAULT_ANSWER_CAP,
    ):
        self._state = (graph, engine if engine is not None else ReachabilityEngine(graph))
        self.answer_cap = answer_cap
        self.admin_lock = threading.Lock()

    @property
    def graph(self) -> CallGraph:
        return self._state[0]

    @property
    def engine(self) -> ReachabilityEngine:
        return self._state[1]

    def swap(self, graph: CallGraph, engine: ReachabilityEngine) -> None:
        """Replace the graph wholesale (snapshot reload). In-flight queries
        finish against the old graph, which stays consistent."""
        self._state = (graph, engine)

    def handle(self, request: QueryRequest) -> QueryResult:
        request.validate()
        graph, engine = self._state
        kind = request.kind
        cached = False
        started = time.perf_counter()
        if kind == "file":
            edges, version = graph.edges_in_file_v(request.subject)
            answers = sorted(f"{e.caller} {e.callee} {e.file}" for e in edges)
        elif kind == "source":
            names, version, cached = engine.forward_closure_v(request.subject)
            answers = sorted(names)
        elif kind == "dest":
            names, version, cached = engine.backward_closure_v(request.subject)
            answers = sorted(names)
        elif kind == "callees":
            names, version = graph.callees_of_v(request.subject)
            answers = sorted(names)
        elif kind == "callers":
            names, version = graph.callers_of_v(request.subject)
            answers = sorted(names)
        elif kind == "cutoff":
            names, version, cached = engine.cutoff_closure_v(
                request.subject,
                frozenset(request.excluded or ()),
                request.mode or "filter",
            )
            answers = sorted(names)
        elif kind == "reachable":
            reachable, version, cached = engine.is_reachable_v(
                request.subject, request.target
            )
            answers = ["true" if reachable else "false"]
        elif kind == "top":
            limit = request.limit if request.limit is not None else 10
            ranked, version = engine.top_called_v(limit)
            answers = [f"{name} {count}" for name, count in ranked]
        else:  # stats
            stats = graph.stats()
            version = stats.version
            answers = [f"{name} {value}" for name, value in zip(stats._fields, stats)]
        elapsed = time.perf_counter() - started

        truncated = False
        if len(answers) > self.answer_cap:
            del answers[self.answer_cap :]
            truncated = True
        return QueryResult(
            kind=kind,
            answers=answers,
            count=len(answers),
            elapsed=elapsed,
            graph_version=version,
            cached=cached,
            truncated=truncated,
        )


# -- rendering ----------------------------------------------------------------


def query_echo(request: QueryRequest) -> str:
    parts = [request.kind]
    if request.subject:
        parts.append(request.subject)
    if request.kind == "cutoff":
        parts.append(request.mode or "filter")
        if request.excluded:
            parts.append("excluding " + ",".join(request.excluded))
    elif request.kind == "reachable":
        parts.insert(2, "->")
        parts.append(request.target or "")
    elif request.kind == "top":
        parts.append(str(request.limit if request.limit is not None else 10))
    return " ".join(p for p in parts if p)


def render_structured(request: QueryRequest, result: QueryResult) -> str:
    head = (
        f"{result.kind} {result.count} {result.elapsed:.6f} "
        f"{result.graph_version} {str(result.cached).lower()}"
    )
    if result.truncated:
        head += " truncated"
    lines = [head]
    lines.extend(result.answers)
    return "\n".join(lines) + "\n"


def render_html(request: QueryRequest, result: QueryResult) -> str:
    out = [f"<h3>{html.escape(query_echo(request))}</h3>", "<ul>"]
    out.extend(f"<li>{html.escape(answer)}</li>" for answer in result.answers)
    out.append("</ul>")
    if result.truncated:
        out.append("<p>truncated</p>")
    return "\n".join(out) + "\n"


def render_result(request: QueryRequest, result: QueryResult) -> str:
    if request.render == "html":
        return render_html(request, result)
    return render_structured(request, result)


def report_lines(report: IngestReport, version: int) -> str:
    lines = [
        f"files_attempted {report.files_attempted}",
        f"files_parsed {report.files_parsed}",
        f"edges_emitted {report.edges_emitted}",
        f"duplicate_edges {report.duplicate_edges}",
        f"parse_errors {len(report.parse_errors)}",
        f"elapsed {report.elapsed:.6f}",
        f"version {version}",
    ]
    for failure in report.parse_errors:
        lines.append(
            f"parse_error {failure.file} {failure.line} {failure.column} {failure.message}"
        )
    return "\n".join(lines) + "\n"


# -- request construction from wire parameters ---------------------------------

_SUBJECT_ALIASES = ("subject", "fn", "file", "name")
_KNOWN_PARAMS = frozenset(
    _SUBJECT_ALIASES + ("target", "excluded", "mode", "limit", "render")
)


def request_from_params(kind: str, params: Sequence[tuple[str, str]]) -> QueryRequest:
    """Build a QueryRequest from decoded query parameters.

    Parameter names mirror the request fields; `fn`, `file` and `name` are
    accepted as spellings of `subject`. Unknown parameters are rejected so a
    typo cannot silently turn into an unfiltered query.
    """
    seen: dict[str, str] = {}
    subject: str | None = None
    for key, value in params:
        if key not in _KNOWN_PARAMS:
            raise QueryError(key, "unknown parameter")
        if key in _SUBJECT_ALIASES:
            if subject is not None and value != subject:
                raise QueryError(key, "conflicting subject values")
            subject = value
            continue
        if key in seen:
            raise QueryError(key, "repeated parameter")
        seen[key] = value

    limit: int | None = None
    if "limit" in seen:
        try:
            limit = int(seen["limit"])
        except ValueError:
            raise QueryError("limit", f"not an integer: {seen['limit']!r}") from None
    excluded: tuple[str, ...] | None = None
    if "excluded" in seen:
        excluded = tuple(part for part in seen["excluded"].split(",") if part)
    return QueryRequest(
        kind=kind,
        subject=subject,
        target=seen.get("target"),
        excluded=excluded,
        mode=seen.get("mode"),
        limit=limit,
        render=seen.get("render", "structured"),
    )


# -- HTTP server ----------------------------------------------------------------


class QueryHTTPServer(ThreadingHTTPServer):
    daemon_threads = False  # drain in-flight handlers on close
    allow_reuse_address = True

    def __init__(self, address: tuple[str, int], service: QueryService):
        self.service = service
        super().__init__(address, _RequestHandler)


class _RequestHandler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    server_version = "calldep"

    # -- plumbing --

    def log_message(self, format: str, *args) -> None:
        pass  # request logging is the client's business, not stderr's

    def _send(self, status: int, body: str, content_type: str = "text/plain; charset=utf-8") -> None:
        payload = body.encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(payload)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(payload)

    def _drain_body(self) -> None:
        length = int(self.headers.get("Content-Length") or 0)
        while length > 0:
            chunk = self.rfile.read(min(length, 65536))
            if not chunk:
                break
            length -= len(chunk)

    # -- verbs --

    def do_OPTIONS(self) -> None:
        self.send_response(204)
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.send_header("Content-Length", "0")
        self.end_headers()

    def do_GET(self) -> None:
        self._route(post=False)

    def do_POST(self) -> None:
        self._drain_body()
        self._route(post=True)

    # -- routing --

    def _route(self, post: bool) -> None:
        url = urlsplit(self.path)
        params = parse_qsl(url.query, keep_blank_values=True)
        try:
            if url.path.startswith("/query/"):
                if post:
                    self._send(405, "error method: use GET for queries\n")
                    return
                self._handle_query(url.path[len("/query/") :], params)
            elif url.path == "/stats":
                if post:
                    self._send(405, "error method: use GET for queries\n")
                    return
                self._handle_query("stats", params)
            elif url.path == "/admin/ingest":
                if not post:
                    self._send(405, "error method: use POST for admin\n")
                    return
                self._handle_ingest(dict(params))
            elif url.path == "/admin/snapshot":
                if not post:
                    self._send(405, "error method: use POST for admin\n")
                    return
                self._handle_snapshot(dict(params))
            else:
                self._send(404, f"error path: no such endpoint {url.path}\n")
        except QueryError as exc:
            self._send(400, f"error {exc}\n")
        except BrokenPipeError:
            raise
        except Exception as exc:  # never take the server down with a request
            self._send(500, f"error internal: {exc}\n")

    def _handle_query(self, kind: str, params: Sequence[tuple[str, str]]) -> None:
        request = request_from_params(kind, params)
        result = self.server.service.handle(request)
        body = render_result(request, result)
        if request.render == "html":
            self._send(200, body, "text/html; charset=utf-8")
        else:
            self._send(200, body)

    def _handle_ingest(self, params: dict[str, str]) -> None:
        root = params.get("root")
        if not root:
            self._send(400, "error root: required\n")
            return
        mode = params.get("mode", "strict")
        if mode not in ("strict", "skip"):
            self._send(400, f"error mode: unknown ingest mode {mode!r}\n")
            return
        service = self.server.service
        with service.admin_lock:
            graph, engine = service._state
            try:
                report = ingest_path(graph, root, mode)
            except IngestError as exc:
                engine.invalidate(graph.version)
                self._send(400, f"error ingest: {exc}\n")
                return
            except FileNotFoundError as exc:
                self._send(400, f"error root: {exc}\n")
                return
            engine.invalidate(graph.version)
        self._send(200, report_lines(report, graph.version))

    def _handle_snapshot(self, params: dict[str, str]) -> None:
        action = params.get("action")
        path = params.get("path")
        if action not in ("save", "load"):
            self._send(400, "error action: must be save or load\n")
            return
        if not path:
            self._send(400, "error path: required\n")
            return
        service = self.server.service
        with service.admin_lock:
            if action == "save":
                size = save_snapshot(service.graph, path)
                self._send(200, f"saved {size}\n")
                return
            try:
                graph = load_snapshot(path)
            except SnapshotError as exc:
                self._send(400, f"error snapshot: {exc}\n")
                return
            service.swap(graph, ReachabilityEngine(graph))
            stats = graph.stats()
        lines = [f"{name} {value}" for name, value in zip(stats._fields, stats)]
        self._send(200, "\n".join(["loaded"] + lines) + "\n")


def run_server(server: QueryHTTPServer) -> None:
    """Serve until SIGINT/SIGTERM, then drain in-flight requests and close."""
    import signal

    def request_shutdown(signum, frame) -> None:
        # shutdown() blocks until the serve loop exits, so hop threads
        threading.Thread(target=server.shutdown, daemon=True).start()

    if threading.current_thread() is threading.main_thread():
        signal.signal(signal.SIGINT, request_shutdown)
        signal.signal(signal.SIGTERM, request_shutdown)
    try:
        server.serve_forever()
    finally:
        server.server_close()


def serve(
    service: QueryService,
    addr: str = "127.0.0.1",
    port: int = 8377,
) -> None:
    """Bind and run the HTTP server until a shutdown signal arrives."""
    run_server(QueryHTTPServer((addr, port), service))
