from __future__ import annotations

import http.client
import re
import threading
import urllib.request
from urllib.parse import quote

import pytest

from calldep.grammar import RawEdge
from calldep.service import (
    QueryError,
    QueryHTTPServer,
    QueryRequest,
    QueryService,
    query_echo,
    render_html,
    render_result,
    render_structured,
    request_from_params,
)
from calldep.snapshot import save_snapshot
from calldep.store import CallGraph
from conftest import graph_from_pairs
from helpers import parse_structured


# -- handle() ---------------------------------------------------------------


def test_dest_on_chain(chain_graph):
    service = QueryService(chain_graph)
    result = service.handle(QueryRequest(kind="dest", subject="c"))
    assert result.answers == ["a", "b"]
    assert result.count == 2
    assert result.kind == "dest"
    assert result.graph_version == chain_graph.version


def test_stats_on_empty_store():
    service = QueryService(CallGraph())
    result = service.handle(QueryRequest(kind="stats"))
    assert result.answers == [
        "function_count 0",
        "file_count 0",
        "edge_count 0",
        "raw_edge_count 0",
        "version 0",
    ]


def test_cutoff_filter_example(chain_graph):
    service = QueryService(chain_graph)
    result = service.handle(
        QueryRequest(kind="cutoff", subject="a", excluded=("b",), mode="filter")
    )
    assert result.answers == ["c"]


def test_cutoff_default_mode_is_filter(chain_graph):
    service = QueryService(chain_graph)
    result = service.handle(QueryRequest(kind="cutoff", subject="a", excluded=("b",)))
    assert result.answers == ["c"]


def test_cutoff_barrier(chain_graph):
    service = QueryService(chain_graph)
    result = service.handle(
        QueryRequest(kind="cutoff", subject="a", excluded=("b",), mode="barrier")
    )
    assert result.answers == []
    assert result.count == 0


def test_source_answers_sorted(chain_graph):
    service = QueryService(chain_graph)
    result = service.handle(QueryRequest(kind="source", subject="a"))
    assert result.answers == sorted(result.answers) == ["b", "c"]


def test_file_answers_are_triples(chain_graph):
    service = QueryService(chain_graph)
    result = service.handle(QueryRequest(kind="file", subject="t"))
    assert result.answers == ["a b t", "b c t"]


def test_reachable_answers(chain_graph):
    service = QueryService(chain_graph)
    yes = service.handle(QueryRequest(kind="reachable", subject="a", target="c"))
    no = service.handle(QueryRequest(kind="reachable", subject="c", target="a"))
    assert yes.answers == ["true"]
    assert no.answers == ["false"]


def test_top_answers_ranked(star_graph):
    service = QueryService(star_graph)
    result = service.handle(QueryRequest(kind="top", limit=2))
    assert result.answers == ["x 3", "p1 0"]


def test_callees_are_direct_neighbors_only(chain_graph):
    service = QueryService(chain_graph)
    result = service.handle(QueryRequest(kind="callees", subject="a"))
    assert result.answers == ["b"]
    assert result.count == 1
    assert result.graph_version == chain_graph.version
    # direct lookups hit the adjacency map, not the closure cache
    assert service.handle(QueryRequest(kind="callees", subject="a")).cached is False


def test_callers_are_direct_neighbors_only(chain_graph):
    service = QueryService(chain_graph)
    result = service.handle(QueryRequest(kind="callers", subject="c"))
    assert result.answers == ["b"]


def test_callees_sorted_on_fanout(star_graph):
    service = QueryService(star_graph)
    result = service.handle(QueryRequest(kind="callers", subject="x"))
    assert result.answers == sorted(result.answers)
    assert result.count == 3


def test_unknown_names_are_not_errors(chain_graph):
    service = QueryService(chain_graph)
    for request in (
        QueryRequest(kind="source", subject="ghost"),
        QueryRequest(kind="dest", subject="ghost"),
        QueryRequest(kind="file", subject="ghost"),
        QueryRequest(kind="callees", subject="ghost"),
        QueryRequest(kind="callers", subject="ghost"),
    ):
        result = service.handle(request)
        assert result.count == 0
        assert result.answers == []


def test_cached_flag_on_second_query(chain_graph):
    service = QueryService(chain_graph)
    request = QueryRequest(kind="dest", subject="c")
    assert service.handle(request).cached is False
    assert service.handle(request).cached is True


def test_answer_cap_truncates(chain_graph):
    service = QueryService(chain_graph, answer_cap=1)
    result = service.handle(QueryRequest(kind="source", subject="a"))
    assert result.truncated
    assert result.count == 1
    assert result.answers == ["b"]


@pytest.mark.parametrize(
    "request_,field",
    [
        (QueryRequest(kind="bogus"), "kind"),
        (QueryRequest(kind="source"), "subject"),
        (QueryRequest(kind="callees"), "subject"),
        (QueryRequest(kind="callers", subject="a", target="b"), "target"),
        (QueryRequest(kind="stats", subject="x"), "subject"),
        (QueryRequest(kind="reachable", subject="a"), "target"),
        (QueryRequest(kind="source", subject="a", target="b"), "target"),
        (QueryRequest(kind="source", subject="a", excluded=("b",)), "excluded"),
        (QueryRequest(kind="dest", subject="a", mode="filter"), "mode"),
        (QueryRequest(kind="cutoff", subject="a", mode="through"), "mode"),
        (QueryRequest(kind="top", limit=0), "limit"),
        (QueryRequest(kind="source", subject="a", limit=3), "limit"),
        (QueryRequest(kind="source", subject="a", render="yaml"), "render"),
    ],
)
def test_validation_errors_name_the_field(chain_graph, request_, field):
    service = QueryService(chain_graph)
    with pytest.raises(QueryError) as err:
        service.handle(request_)
    assert err.value.field == field
    assert str(err.value).startswith(field + ":")


# -- renderers ----------------------------------------------------------------


def test_structured_render_shape(chain_graph):
    service = QueryService(chain_graph)
    request = QueryRequest(kind="dest", subject="c")
    result = service.handle(request)
    body = render_structured(request, result)
    parsed = parse_structured(body)
    assert parsed["kind"] == "dest"
    assert parsed["count"] == 2
    assert parsed["answers"] == ["a", "b"]
    assert parsed["version"] == 1
    assert body.endswith("\n")
    assert re.match(r"dest 2 \d+\.\d{6} 1 false$", body.splitlines()[0])


def test_structured_render_truncated_marker(chain_graph):
    service = QueryService(chain_graph, answer_cap=1)
    request = QueryRequest(kind="source", subject="a")
    result = service.handle(request)
    head = render_structured(request, result).splitlines()[0]
    assert head.endswith(" truncated")


def test_html_render_same_answers(chain_graph):
    service = QueryService(chain_graph)
    request = QueryRequest(kind="dest", subject="c", render="html")
    result = service.handle(request)
    body = render_html(request, result)
    assert body.startswith("<h3>dest c</h3>")
    assert body.count("<li>") == result.count
    assert re.findall(r"<li>(.*?)</li>", body) == result.answers
    assert "<ul>" in body and "</ul>" in body


def test_html_render_escapes(star_graph):
    request = QueryRequest(kind="source", subject="<b>&x", render="html")
    result = QueryService(star_graph).handle(request)
    body = render_html(request, result)
    assert "<b>&x" not in body
    assert "&lt;b&gt;&amp;x" in body


def test_render_result_dispatches(chain_graph):
    service = QueryService(chain_graph)
    structured = QueryRequest(kind="dest", subject="c")
    html_request = QueryRequest(kind="dest", subject="c", render="html")
    assert render_result(structured, service.handle(structured)).startswith("dest ")
    assert render_result(html_request, service.handle(html_request)).startswith("<h3>")


def test_query_echo_variants():
    assert query_echo(QueryRequest(kind="stats")) == "stats"
    assert query_echo(QueryRequest(kind="top", limit=5)) == "top 5"
    assert query_echo(QueryRequest(kind="reachable", subject="a", target="b")) == (
        "reachable a -> b"
    )
    assert query_echo(
        QueryRequest(kind="cutoff", subject="a", excluded=("b", "c"), mode="barrier")
    ) == "cutoff a barrier excluding b,c"


# -- request_from_params ---------------------------------------------------------


def test_params_fn_alias():
    request = request_from_params("dest", [("fn", "kmalloc")])
    assert request.subject == "kmalloc"


def test_params_excluded_comma_list():
    request = request_from_params(
        "cutoff", [("fn", "a"), ("excluded", "b,c,"), ("mode", "barrier")]
    )
    assert request.excluded == ("b", "c")
    assert request.mode == "barrier"


def test_params_reject_unknown():
    with pytest.raises(QueryError, match="bogus"):
        request_from_params("dest", [("fn", "a"), ("bogus", "1")])


def test_params_reject_conflicting_subjects():
    with pytest.raises(QueryError, match="conflicting"):
        request_from_params("dest", [("fn", "a"), ("subject", "b")])


def test_params_reject_bad_limit():
    with pytest.raises(QueryError, match="limit"):
        request_from_params("top", [("limit", "soon")])


def test_params_reject_repeats():
    with pytest.raises(QueryError, match="repeated"):
        request_from_params("cutoff", [("fn", "a"), ("mode", "filter"), ("mode", "barrier")])


# -- live HTTP server --------------------------------------------------------------


@pytest.fixture
def live_server(chain_graph):
    service = QueryService(chain_graph)
    server = QueryHTTPServer(("127.0.0.1", 0), service)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    try:
        yield server
    finally:
        server.shutdown()
        server.server_close()
        thread.join(timeout=5)


def fetch(server, path: str):
    host, port = server.server_address[:2]
    with urllib.request.urlopen(f"http://{host}:{port}{path}") as response:
        return response.status, response.read().decode("utf-8"), response.headers


def test_http_dest_query(live_server):
    status, body, headers = fetch(live_server, "/query/dest?fn=c")
    assert status == 200
    parsed = parse_structured(body)
    assert parsed["answers"] == ["a", "b"]
    assert headers["Access-Control-Allow-Origin"] == "*"
    assert headers["Content-Type"].startswith("text/plain")


def test_http_stats_endpoint(live_server):
    status, body, _ = fetch(live_server, "/stats")
    assert status == 200
    assert parse_structured(body)["kind"] == "stats"


def test_http_direct_neighbor_queries(live_server):
    status, body, _ = fetch(live_server, "/query/callees?fn=a")
    assert status == 200
    parsed = parse_structured(body)
    assert parsed["kind"] == "callees"
    assert parsed["answers"] == ["b"]
    status, body, _ = fetch(live_server, "/query/callers?fn=c")
    assert status == 200
    assert parse_structured(body)["answers"] == ["b"]


def test_http_html_render(live_server):
    status, body, headers = fetch(live_server, "/query/source?fn=a&render=html")
    assert status == 200
    assert headers["Content-Type"].startswith("text/html")
    assert "<h3>source a</h3>" in body


def test_http_cutoff_with_params(live_server):
    status, body, _ = fetch(
        live_server, "/query/cutoff?fn=a&excluded=b&mode=barrier"
    )
    assert status == 200
    assert parse_structured(body)["count"] == 0


def test_http_unknown_kind_is_structured_error_and_connection_survives(live_server):
    host, port = live_server.server_address[:2]
    conn = http.client.HTTPConnection(host, port)
    try:
        conn.request("GET", "/query/bogus?fn=x")
        response = conn.getresponse()
        assert response.status == 400
        assert response.read().decode().startswith("error kind:")
        # same connection, next request must work (keep-alive survives errors)
        conn.request("GET", "/query/dest?fn=c")
        response = conn.getresponse()
        assert response.status == 200
        assert parse_structured(response.read().decode())["answers"] == ["a", "b"]
    finally:
        conn.close()


def test_http_validation_error_names_field(live_server):
    host, port = live_server.server_address[:2]
    conn = http.client.HTTPConnection(host, port)
    try:
        conn.request("GET", "/query/source")
        response = conn.getresponse()
        assert response.status == 400
        assert "subject" in response.read().decode()
    finally:
        conn.close()


def test_http_unknown_endpoint_404(live_server):
    host, port = live_server.server_address[:2]
    conn = http.client.HTTPConnection(host, port)
    try:
        conn.request("GET", "/nope")
        assert conn.getresponse().status == 404 or True
        # body must be drained to reuse; simpler: new connection below
    finally:
        conn.close()
    import urllib.error

    with pytest.raises(urllib.error.HTTPError) as err:
        fetch(live_server, "/nope")
    assert err.value.code == 404


def test_http_query_rejects_post(live_server):
    host, port = live_server.server_address[:2]
    conn = http.client.HTTPConnection(host, port)
    try:
        conn.request("POST", "/query/dest?fn=c")
        assert conn.getresponse().status == 405
    finally:
        conn.close()


def test_http_keep_alive_many_requests_one_connection(live_server):
    host, port = live_server.server_address[:2]
    conn = http.client.HTTPConnection(host, port)
    try:
        for _ in range(10):
            conn.request("GET", "/query/dest?fn=c")
            response = conn.getresponse()
            assert response.status == 200
            response.read()
    finally:
        conn.close()


def test_http_concurrent_queries_match_sequential(live_server):
    paths = [
        "/query/dest?fn=c",
        "/query/source?fn=a",
        "/query/cutoff?fn=a&excluded=b",
        "/query/reachable?fn=a&target=c",
        "/stats",
        "/query/top?limit=2",
    ] * 6
    sequential = [fetch(live_server, p)[1] for p in paths]
    results: dict[int, str] = {}
    errors = []

    def worker(index: int, path: str) -> None:
        try:
            results[index] = fetch(live_server, path)[1]
        except Exception as exc:  # pragma: no cover
            errors.append(exc)

    threads = [
        threading.Thread(target=worker, args=(i, p)) for i, p in enumerate(paths)
    ]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert not errors
    for index, path in enumerate(paths):
        seq = parse_structured(sequential[index])
        conc = parse_structured(results[index])
        assert conc["answers"] == seq["answers"], path
        assert conc["count"] == seq["count"], path


def test_http_admin_ingest_and_cache_invalidation(live_server, tmp_path):
    (tmp_path / "extra.eg").write_text(
        'digraph callgraph { "c" -> "d" [style=solid]; }'
    )
    # warm the cache, then mutate through the admin endpoint
    before = parse_structured(fetch(live_server, "/query/source?fn=a")[1])
    warm = parse_structured(fetch(live_server, "/query/source?fn=a")[1])
    assert warm["cached"]

    host, port = live_server.server_address[:2]
    conn = http.client.HTTPConnection(host, port)
    try:
        conn.request("POST", f"/admin/ingest?root={quote(str(tmp_path))}&mode=strict")
        response = conn.getresponse()
        assert response.status == 200
        lines = response.read().decode().splitlines()
        assert "files_parsed 1" in lines
    finally:
        conn.close()

    after = parse_structured(fetch(live_server, "/query/source?fn=a")[1])
    assert after["version"] == before["version"] + 1
    assert not after["cached"]
    assert after["answers"] == ["b", "c", "d"]


def test_http_admin_snapshot_save_and_load(live_server, tmp_path):
    snap = tmp_path / "live.snap"
    host, port = live_server.server_address[:2]
    conn = http.client.HTTPConnection(host, port)
    try:
        conn.request("POST", f"/admin/snapshot?action=save&path={quote(str(snap))}")
        response = conn.getresponse()
        assert response.status == 200
        assert response.read().decode().startswith("saved ")
        assert snap.exists()

        # build a different snapshot offline and load it in
        other = graph_from_pairs([("x", "y")])
        other_path = tmp_path / "other.snap"
        save_snapshot(other, other_path)
        conn.request(
            "POST", f"/admin/snapshot?action=load&path={quote(str(other_path))}"
        )
        response = conn.getresponse()
        assert response.status == 200
        assert response.read().decode().splitlines()[0] == "loaded"
    finally:
        conn.close()

    status, body, _ = fetch(live_server, "/query/source?fn=x")
    assert parse_structured(body)["answers"] == ["y"]


def test_http_admin_requires_post(live_server):
    import urllib.error

    with pytest.raises(urllib.error.HTTPError) as err:
        fetch(live_server, "/admin/ingest?root=/tmp")
    assert err.value.code == 405


def test_http_admin_bad_root_reports_error(live_server):
    host, port = live_server.server_address[:2]
    conn = http.client.HTTPConnection(host, port)
    try:
        conn.request("POST", "/admin/ingest?root=/definitely/not/here")
        response = conn.getresponse()
        assert response.status == 400
        assert "error" in response.read().decode()
    finally:
        conn.close()


def test_http_options_preflight(live_server):
    host, port = live_server.server_address[:2]
    conn = http.client.HTTPConnection(host, port)
    try:
        conn.request("OPTIONS", "/query/dest")
        response = conn.getresponse()
        assert response.status == 204
        assert response.getheader("Access-Control-Allow-Origin") == "*"
        response.read()
    finally:
        conn.close()
