from __future__ import annotations

import pytest

from calldep.grammar import RawEdge
from calldep.store import CallGraph


def graph_from_pairs(pairs, file: str = "t", style: str = "solid") -> CallGraph:
    graph = CallGraph()
    graph.add_edges([RawEdge(s, d, style, file) for s, d in pairs])
    return graph


# Acceptance tests record one line per criterion; stdout capture would hide
# them, so they are replayed in the terminal summary where tee can see them.
_acceptance_lines: list[str] = []


def record_acceptance(line: str) -> None:
    if line not in _acceptance_lines:
        _acceptance_lines.append(line)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if "test_acceptance" not in item.nodeid:
        return
    if report.when == "call" and report.failed:
        record_acceptance(f"[ACCEPTANCE] {item.name}: FAIL")
    elif report.skipped:
        record_acceptance(f"[ACCEPTANCE] {item.name}: SKIP")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)


@pytest.fixture
def chain_graph() -> CallGraph:
    """a -> b -> c"""
    return graph_from_pairs([("a", "b"), ("b", "c")])


@pytest.fixture
def cycle_graph() -> CallGraph:
    """a -> b -> a"""
    return graph_from_pairs([("a", "b"), ("b", "a")])


@pytest.fixture
def star_graph() -> CallGraph:
    """p1, p2, p3 all call x"""
    return graph_from_pairs([("p1", "x"), ("p2", "x"), ("p3", "x")])


@pytest.fixture
def fixture_tree(tmp_path):
    """Two well-formed dump files: 3 edges in main.eg, 5 in sub/util.eg."""
    (tmp_path / "main.eg").write_text(
        'digraph callgraph {\n'
        '    "main" -> "init" [style=solid];\n'
        '    "main" -> "loop" [style=solid];\n'
        '    "loop" -> "step" [style=dotted];\n'
        '}\n'
    )
    sub = tmp_path / "sub"
    sub.mkdir()
    (sub / "util.eg").write_text(
        'digraph callgraph {\n'
        '    "alloc" -> "grow" [style=solid];\n'
        '    "alloc" -> "zero" [style=solid];\n'
        '    "free" -> "shrink" [style=solid];\n'
        '    "grow" -> "zero" [style=dotted];\n'
        '    "shrink" -> "zero" [style=solid];\n'
        '}\n'
    )
    return tmp_path
