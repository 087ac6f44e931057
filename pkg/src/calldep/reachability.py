"""Memoized transitive closure over the call graph.

Closure sets are cached per function and per direction, keyed to the graph
version. A traversal that reaches an already-cached node splices that node's
whole closure in without walking past it: reachability is transitive, so the
cached set is exactly the frontier beyond the node. Any mutation bumps the
graph version and retires every cached set at once; there is no partial
invalidation to get wrong.

Closure semantics follow call-path reachability: a function is in its own
closure only when it sits on a cycle (a real call path from it to itself).

The *_v variants return (answer, version, cached) captured under one read
lock, so a caller relaying results (the query service) can report exactly
which graph state it answered against.
"""

from __future__ import annotations

import threading
from collections import deque
from typing import Callable, Iterable

from .store import CallGraph

_EMPTY: frozenset[str] = frozenset()


def finish_order(
    nodes: list[str], neighbors: Callable[[str], Iterable[str]]
) -> list[str]:
    """Depth-first finishing order: successors come before their callers, up
    to cycles. Iterative, since kernel graphs nest deeper than the
    interpreter stack.

    Materializing closures in this order means each source finds its callees
    already cached, so the whole-graph walk does about one adjacency fetch
    per function instead of one per reachable pair.
    """
    seen: set[str] = set()
    order: list[str] = []
    for root in nodes:
        if root in seen:
            continue
        seen.add(root)
        stack: list[tuple[str, list[str]]] = [(root, list(neighbors(root)))]
        while stack:
            node, pending = stack[-1]
            while pending:
                succ = pending.pop()
                if succ not in seen:
                    seen.add(succ)
                    stack.append((succ, list(neighbors(succ))))
                    break
            else:
                order.append(node)
                stack.pop()
    return order


class ReachabilityEngine:
    def __init__(self, graph: CallGraph):
        self._graph = graph
        self._cache_lock = threading.Lock()
        self._forward: dict[str, frozenset[str]] = {}
        self._backward: dict[str, frozenset[str]] = {}
        self._built_for = graph.version

    # -- cache plumbing -------------------------------------------------------

    def _sync(self, version: int) -> None:
        """Drop every cached set built for an older graph version.

        Called with the graph read lock held, so `version` cannot move under
        us; concurrent readers syncing to the same version are harmless.
        """
        with self._cache_lock:
            if self._built_for != version:
                self._forward.clear()
                self._backward.clear()
                self._built_for = version

    def invalidate(self, version: int) -> None:
        """Retire caches eagerly after a known mutation to `version`.

        Lazy version checks inside every query make this optional; calling it
        just frees memory sooner. A call with an unchanged version keeps the
        caches intact.
        """
        self._sync(version)

    def _remember(self, cache: dict[str, frozenset[str]], version: int,
                  name: str, result: frozenset[str]) -> None:
        with self._cache_lock:
            if self._built_for == version:
                cache[name] = result

    def cache_memory_estimate(self) -> int:
        """Rough byte size of the cached closure sets (pointers, not strings;
        the names themselves live in the store's interner)."""
        with self._cache_lock:
            entries = len(self._forward) + len(self._backward)
            held = sum(len(s) for s in self._forward.values())
            held += sum(len(s) for s in self._backward.values())
            return entries * 120 + held * 40

    # -- core traversal -------------------------------------------------------

    @staticmethod
    def _traverse(
        start: str,
        neighbors: Callable[[str], Iterable[str]],
        cache: dict[str, frozenset[str]],
    ) -> frozenset[str]:
        """Worklist closure from `start`, splicing cached sets at their nodes."""
        reached: set[str] = set()
        queued = {start}
        work = deque((start,))
        while work:
            node = work.popleft()
            for succ in neighbors(node):
                if succ in reached:
                    continue
                reached.add(succ)
                spliced = cache.get(succ)
                if spliced is not None:
                    reached |= spliced
                elif succ not in queued:
                    queued.add(succ)
                    work.append(succ)
        return frozenset(reached)

    def _closure_v(self, name: str, forward: bool) -> tuple[frozenset[str], int, bool]:
        graph = self._graph
        with graph.read_lock():
            version = graph.version
            self._sync(version)
            cache = self._forward if forward else self._backward
            hit = cache.get(name)
            if hit is not None:
                return hit, version, True
            neighbors = (
                graph.forward_neighbors if forward else graph.reverse_neighbors
            )
            result = self._traverse(name, neighbors, cache)
            self._remember(cache, version, name, result)
            return result, version, False

    # -- queries ----------------------------------------------------------------

    def forward_closure(self, name: str) -> frozenset[str]:
        """Everything `name` can reach through calls; empty for unknown names."""
        return self._closure_v(name, forward=True)[0]

    def forward_closure_v(self, name: str) -> tuple[frozenset[str], int, bool]:
        return self._closure_v(name, forward=True)

    def backward_closure(self, name: str) -> frozenset[str]:
        """Everything that can reach `name` through calls."""
        return self._closure_v(name, forward=False)[0]

    def backward_closure_v(self, name: str) -> tuple[frozenset[str], int, bool]:
        return self._closure_v(name, forward=False)

    def is_reachable(self, source: str, dest: str) -> bool:
        """True when a call path of length >= 1 leads from source to dest."""
        return self.is_reachable_v(source, dest)[0]

    def is_reachable_v(self, source: str, dest: str) -> tuple[bool, int, bool]:
        graph = self._graph
        with graph.read_lock():
            version = graph.version
            self._sync(version)
            hit = self._forward.get(source)
            if hit is not None:
                return dest in hit, version, True
            hit = self._backward.get(dest)
            if hit is not None:
                return source in hit, version, True
            result = self._traverse(source, graph.forward_neighbors, self._forward)
            self._remember(self._forward, version, source, result)
            return dest in result, version, False

    def cutoff_closure(
        self, name: str, excluded: frozenset[str] | set[str], mode: str = "filter"
    ) -> frozenset[str]:
        """Forward closure under an exclusion set.

        filter: reach everything, then drop excluded names from the answer;
        paths may still pass through them. barrier: excluded functions are
        removed from the graph before walking, so nothing beyond them is
        reached, and an excluded start reaches nothing.
        """
        return self.cutoff_closure_v(name, excluded, mode)[0]

    def cutoff_closure_v(
        self, name: str, excluded: frozenset[str] | set[str], mode: str = "filter"
    ) -> tuple[frozenset[str], int, bool]:
        if mode == "filter":
            closure, version, cached = self._closure_v(name, forward=True)
            return closure - frozenset(excluded), version, cached
        if mode != "barrier":
            raise ValueError(f"unknown cutoff mode: {mode!r}")
        graph = self._graph
        with graph.read_lock():
            version = graph.version
            if name in excluded:
                return _EMPTY, version, False
            reached: set[str] = set()
            queued = {name}
            work = deque((name,))
            while work:
                node = work.popleft()
                for succ in graph.forward_neighbors(node):
                    if succ in excluded or succ in reached:
                        continue
                    reached.add(succ)
                    if succ not in queued:
                        queued.add(succ)
                        work.append(succ)
            return frozenset(reached), version, False

    def closure_edge_count(self) -> int:
        """Total number of reachable (source, dest) pairs in the graph.

        Sources are visited in depth-first finishing order, so by the time a
        function is materialized its callees' closures are nearly always
        cached and the walk splices instead of re-treading them.
        """
        graph = self._graph
        with graph.read_lock():
            version = graph.version
            self._sync(version)
            total = 0
            for name in finish_order(graph.function_names(),
                                     graph.forward_neighbors):
                hit = self._forward.get(name)
                if hit is None:
                    hit = self._traverse(name, graph.forward_neighbors, self._forward)
                    self._remember(self._forward, version, name, hit)
                total += len(hit)
            return total

    def top_called(self, limit: int) -> list[tuple[str, int]]:
        """Functions ranked by transitive caller count (descending, then name)."""
        return self.top_called_v(limit)[0]

    def top_called_v(self, limit: int) -> tuple[list[tuple[str, int]], int]:
        if limit < 1:
            raise ValueError("limit must be positive")
        graph = self._graph
        with graph.read_lock():
            version = graph.version
            self._sync(version)
            counts: list[tuple[str, int]] = []
            for name in finish_order(graph.function_names(),
                                     graph.reverse_neighbors):
                hit = self._backward.get(name)
                if hit is None:
                    hit = self._traverse(name, graph.reverse_neighbors, self._backward)
                    self._remember(self._backward, version, name, hit)
                counts.append((name, len(hit)))
        counts.sort(key=lambda item: (-item[1], item[0]))
        return counts[:limit], version
