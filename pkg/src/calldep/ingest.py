"""Directory ingestion: walk a tree of .eg/.dot dumps into a call graph.

Each compilation unit's dump becomes one edge batch tagged with the file's
root-relative path (extension stripped), so per-file queries line up with
the source tree the dumps came from.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from pathlib import Path

from .grammar import EgSyntaxError, parse_text
from .store import CallGraph

SUFFIXES = (".eg", ".dot")


@dataclass(frozen=True)
class ParseFailure:
    file: str
    line: int
    column: int
    message: str


@dataclass
class IngestReport:
    files_attempted: int = 0
    files_parsed: int = 0
    edges_emitted: int = 0
    duplicate_edges: int = 0
    parse_errors: list[ParseFailure] = field(default_factory=list)
    elapsed: float = 0.0


class IngestError(Exception):
    """Strict-mode ingestion failure; carries the first offending file."""

    def __init__(self, failure: ParseFailure, report: "IngestReport"):
        self.failure = failure
        self.report = report
        super().__init__(
            f"{failure.file}:{failure.line}:{failure.column}: {failure.message}"
        )


def discover_inputs(root: Path) -> list[Path]:
    """All .eg/.dot files under `root`, in sorted order for determinism."""
    found = {p for suffix in SUFFIXES for p in root.rglob(f"*{suffix}")}
    return sorted(p for p in found if p.is_file())


def file_tag(root: Path, path: Path) -> str:
    """Root-relative path with the dump extension stripped."""
    rel = path.relative_to(root)
    return str(rel.with_suffix("")) if rel.suffix in SUFFIXES else str(rel)


def ingest_path(graph: CallGraph, root: str | Path, mode: str = "strict") -> IngestReport:
    """Parse every dump under `root` and add its edges to `graph`.

    strict mode stops at the first bad file (nothing from that file is
    committed; earlier files stay). skip mode records the failure in the
    report and moves on. Files are parsed fully before any edge is added,
    so a file either contributes all of its edges or none.
    """
    if mode not in ("strict", "skip"):
        raise ValueError(f"unknown ingest mode: {mode!r}")
    root = Path(root)
    if not root.is_dir():
        raise FileNotFoundError(f"ingest root is not a directory: {root}")

    report = IngestReport()
    started = time.perf_counter()
    for path in discover_inputs(root):
        report.files_attempted += 1
        tag = file_tag(root, path)
        try:
            # latin-1 maps every byte to a char; stray bytes then surface as
            # tokenizer errors with a real line and column
            text = path.read_bytes().decode("latin-1")
            edges = parse_text(text, tag)
        except EgSyntaxError as exc:
            failure = ParseFailure(tag, exc.line, exc.column, exc.message)
        except OSError as exc:
            failure = ParseFailure(tag, 0, 0, f"unreadable: {exc.strerror or exc}")
        else:
            added, duplicates = graph.add_edges(edges)
            report.files_parsed += 1
            report.edges_emitted += added + duplicates
            report.duplicate_edges += duplicates
            continue
        report.parse_errors.append(failure)
        if mode == "strict":
            report.elapsed = time.perf_counter() - started
            raise IngestError(failure, report)
    report.elapsed = time.perf_counter() - started
    return report
