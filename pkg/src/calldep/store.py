"""Indexed call-edge database.

Holds the deduplicated edge set with forward, reverse and per-file indexes.
Node identity is the bare function name: static functions with the same name
in different files are conflated, which is exactly what name-joined closure
queries need (and a documented limitation for kernel-style code bases).

Writes are serialized; readers run concurrently and never observe a
half-applied batch. Every mutation batch bumps the version counter, which is
what downstream caches key on.
"""

from __future__ import annotations

import sys
import threading
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Iterable, Iterator, NamedTuple

from .grammar import RawEdge, STYLES

_EMPTY: frozenset[str] = frozenset()

# style <-> wire code, also used by the snapshot format
STYLE_CODES = {style: code for code, style in enumerate(STYLES)}
CODE_STYLES = dict(enumerate(STYLES))


class RWLock:
    """Writer-preferring readers-writer lock (not reentrant)."""

    def __init__(self):
        self._cond = threading.Condition()
        self._readers = 0
        self._writer = False
        self._writers_waiting = 0

    @contextmanager
    def read(self) -> Iterator[None]:
        with self._cond:
            while self._writer or self._writers_waiting:
                self._cond.wait()
            self._readers += 1
        try:
            yield
        finally:
            with self._cond:
                self._readers -= 1
                if not self._readers:
                    self._cond.notify_all()

    @contextmanager
    def write(self) -> Iterator[None]:
        with self._cond:
            self._writers_waiting += 1
            while self._writer or self._readers:
                self._cond.wait()
            self._writers_waiting -= 1
            self._writer = True
        try:
            yield
        finally:
            with self._cond:
                self._writer = False
                self._cond.notify_all()


class Interner:
    """Bijective string <-> dense id table; equal text always gets equal id."""

    __slots__ = ("_ids", "_names")

    def __init__(self):
        self._ids: dict[str, int] = {}
        self._names: list[str] = []

    def intern(self, text: str) -> int:
        ident = self._ids.get(text)
        if ident is None:
            text = sys.intern(text)
            ident = len(self._names)
            self._ids[text] = ident
            self._names.append(text)
        return ident

    def canon(self, text: str) -> str:
        """Intern `text` and return the shared canonical string object."""
        return self._names[self.intern(text)]

    def id_of(self, text: str) -> int | None:
        return self._ids.get(text)

    def name(self, ident: int) -> str:
        return self._names[ident]

    def names(self) -> list[str]:
        return list(self._names)

    def __len__(self) -> int:
        return len(self._names)

    def __contains__(self, text: str) -> bool:
        return text in self._ids

    def byte_size(self) -> int:
        # rough: dict entry + list slot + string payload
        return sum(len(n) + 49 + 88 for n in self._names)


@dataclass(frozen=True)
class CallEdge:
    caller: str
    callee: str
    file: str
    style: str
    multiplicity: int


class GraphStats(NamedTuple):
    function_count: int
    file_count: int
    edge_count: int
    raw_edge_count: int
    version: int


class CallGraph:
    """Deduplicated call-edge set with always-on forward/reverse/file indexes.

    (caller, callee, file, style) is the dedup key; repeats bump the edge's
    multiplicity and the raw edge count, mirroring how the facts arrived.
    """

    def __init__(self):
        self._functions = Interner()
        self._files = Interner()
        # (caller, callee, file, style) -> multiplicity; insertion-ordered
        self._edges: dict[tuple[str, str, str, str], int] = {}
        self._forward: dict[str, set[str]] = {}
        self._reverse: dict[str, set[str]] = {}
        self._file_edges: dict[str, list[tuple[str, str, str, str]]] = {}
        self._version = 0
        self._raw_edge_count = 0
        self._lock = RWLock()
        self.lookup_count = 0  # adjacency fetches, for cache instrumentation

    # -- locking ------------------------------------------------------------

    def read_lock(self):
        return self._lock.read()

    def write_lock(self):
        return self._lock.write()

    @property
    def version(self) -> int:
        return self._version

    # -- mutation -----------------------------------------------------------

    def add_edges(self, batch: Iterable[RawEdge]) -> tuple[int, int]:
        """Insert a batch of raw edges; returns (added, duplicates).

        The version counter moves exactly once per call, even for an empty
        batch, so cached query results tied to the old version retire.
        """
        added = 0
        duplicates = 0
        with self._lock.write():
            for edge in batch:
                caller = self._functions.canon(edge.source)
                callee = self._functions.canon(edge.dest)
                file = self._files.canon(edge.file)
                key = (caller, callee, file, edge.style)
                count = self._edges.get(key)
                if count is None:
                    self._edges[key] = 1
                    self._forward.setdefault(caller, set()).add(callee)
                    self._reverse.setdefault(callee, set()).add(caller)
                    self._file_edges.setdefault(file, []).append(key)
                    added += 1
                else:
                    self._edges[key] = count + 1
                    duplicates += 1
                self._raw_edge_count += 1
            self._version += 1
        return added, duplicates

    # -- reads --------------------------------------------------------------

    def callees_of(self, name: str) -> set[str]:
        """Direct callees of `name`; unknown names yield the empty set."""
        return self.callees_of_v(name)[0]

    def callees_of_v(self, name: str) -> tuple[set[str], int]:
        """callees_of plus the graph version the answer belongs to."""
        with self._lock.read():
            self.lookup_count += 1
            return set(self._forward.get(name, _EMPTY)), self._version

    def callers_of(self, name: str) -> set[str]:
        """Direct callers of `name`; unknown names yield the empty set."""
        return self.callers_of_v(name)[0]

    def callers_of_v(self, name: str) -> tuple[set[str], int]:
        """callers_of plus the graph version the answer belongs to."""
        with self._lock.read():
            self.lookup_count += 1
            return set(self._reverse.get(name, _EMPTY)), self._version

    def edges_in_file(self, path: str) -> list[CallEdge]:
        """All edges whose call site lies in `path`, in insertion order."""
        return self.edges_in_file_v(path)[0]

    def edges_in_file_v(self, path: str) -> tuple[list[CallEdge], int]:
        """edges_in_file plus the graph version the answer belongs to."""
        with self._lock.read():
            result = []
            for key in self._file_edges.get(path, ()):
                caller, callee, file, style = key
                result.append(CallEdge(caller, callee, file, style, self._edges[key]))
            return result, self._version

    def stats(self) -> GraphStats:
        with self._lock.read():
            return GraphStats(
                function_count=len(self._functions),
                file_count=len(self._files),
                edge_count=len(self._edges),
                raw_edge_count=self._raw_edge_count,
                version=self._version,
            )

    def functions(self) -> list[str]:
        with self._lock.read():
            return self._functions.names()

    def files(self) -> list[str]:
        with self._lock.read():
            return self._files.names()

    def edge_items(self) -> list[tuple[str, str, str, str, int]]:
        """(caller, callee, file, style, multiplicity) in insertion order."""
        with self._lock.read():
            return [key + (count,) for key, count in self._edges.items()]

    def name_pairs(self) -> list[tuple[str, str]]:
        """Distinct (caller, callee) pairs, for index-free scan baselines."""
        with self._lock.read():
            return list({(c, d): None for c, d, _, _ in self._edges})

    # -- unlocked accessors, for traversals already under read_lock() --------

    def function_names(self) -> list[str]:
        return self._functions.names()

    def forward_neighbors(self, name: str) -> frozenset[str] | set[str]:
        self.lookup_count += 1
        return self._forward.get(name, _EMPTY)

    def reverse_neighbors(self, name: str) -> frozenset[str] | set[str]:
        self.lookup_count += 1
        return self._reverse.get(name, _EMPTY)

    # -- maintenance ----------------------------------------------------------

    def memory_estimate(self) -> int:
        """Rough byte size of interning tables and indexes (not an allocator
        probe; pointer-level bookkeeping is approximated per entry)."""
        with self._lock.read():
            total = self._functions.byte_size() + self._files.byte_size()
            total += len(self._edges) * 128
            total += sum(len(s) for s in self._forward.values()) * 60
            total += sum(len(s) for s in self._reverse.values()) * 60
            total += sum(len(v) for v in self._file_edges.values()) * 16
            return total

    def _bulk_load(
        self,
        functions: list[str],
        files: list[str],
        rows: Iterable[tuple[int, int, int, str, int]],
        version: int,
        raw_edge_count: int,
    ) -> None:
        """Rebuild contents from snapshot tables: names in interner order,
        rows as (caller id, callee id, file id, style, multiplicity).
        Only for loaders; the graph must be freshly constructed."""
        with self._lock.write():
            function_names = [self._functions.canon(name) for name in functions]
            file_paths = [self._files.canon(name) for name in files]
            for caller_id, callee_id, file_id, style, multiplicity in rows:
                caller = function_names[caller_id]
                callee = function_names[callee_id]
                file = file_paths[file_id]
                self._edges[(caller, callee, file, style)] = multiplicity
                self._forward.setdefault(caller, set()).add(callee)
                self._reverse.setdefault(callee, set()).add(caller)
                self._file_edges.setdefault(file, []).append(
                    (caller, callee, file, style)
                )
            self._version = version
            self._raw_edge_count = raw_edge_count
