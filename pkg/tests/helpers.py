"""Shared test helpers: brute-force oracles and random input generators.

The oracles here are deliberately naive (cubic closure, full rescans,
vertex-deleted copies) so they cannot share a bug with the engine's
worklist-and-splice implementation.
"""

from __future__ import annotations

import random

from calldep.grammar import RawEdge, STYLE_DOTTED, STYLE_SOLID

Pair = tuple[str, str]


# -- brute-force reachability oracles -------------------------------------------


def closure_oracle(nodes: list[str], pairs: list[Pair]) -> dict[str, set[str]]:
    """All-pairs forward reachability by Warshall's algorithm.

    Base relation is the edge set itself, so a node reaches itself only via
    an actual cycle.
    """
    reach: dict[str, set[str]] = {node: set() for node in nodes}
    for caller, callee in pairs:
        reach[caller].add(callee)
    for k in nodes:
        through_k = reach[k]
        for u in nodes:
            if k in reach[u]:
                reach[u] |= through_k
    return reach


def backward_oracle(nodes: list[str], pairs: list[Pair]) -> dict[str, set[str]]:
    forward = closure_oracle(nodes, pairs)
    backward: dict[str, set[str]] = {node: set() for node in nodes}
    for source, reached in forward.items():
        for dest in reached:
            backward[dest].add(source)
    return backward


def cutoff_filter_oracle(
    nodes: list[str], pairs: list[Pair], start: str, excluded: set[str]
) -> set[str]:
    return closure_oracle(nodes, pairs)[start] - excluded


def cutoff_barrier_oracle(
    nodes: list[str], pairs: list[Pair], start: str, excluded: set[str]
) -> set[str]:
    """Closure in the vertex-deleted subgraph."""
    if start in excluded:
        return set()
    kept_nodes = [node for node in nodes if node not in excluded]
    kept_pairs = [
        (caller, callee)
        for caller, callee in pairs
        if caller not in excluded and callee not in excluded
    ]
    return closure_oracle(kept_nodes, kept_pairs)[start]


def closure_edge_count_oracle(nodes: list[str], pairs: list[Pair]) -> int:
    forward = closure_oracle(nodes, pairs)
    return sum(len(reached) for reached in forward.values())


def top_called_oracle(
    nodes: list[str], pairs: list[Pair], limit: int
) -> list[tuple[str, int]]:
    backward = backward_oracle(nodes, pairs)
    ranked = sorted(
        ((name, len(callers)) for name, callers in backward.items()),
        key=lambda item: (-item[1], item[0]),
    )
    return ranked[:limit]


# -- scan oracles for the store's indexes ---------------------------------------


def scan_callees_oracle(pairs: list[Pair], name: str) -> set[str]:
    return {callee for caller, callee in pairs if caller == name}


def scan_callers_oracle(pairs: list[Pair], name: str) -> set[str]:
    return {caller for caller, callee in pairs if callee == name}


# -- random inputs ---------------------------------------------------------------


def random_raw_edges(
    rng: random.Random,
    max_nodes: int = 200,
    files: tuple[str, ...] = ("u0", "u1", "dir/u2"),
) -> list[RawEdge]:
    """Random digraph as raw edges: cycles, self-loops, duplicate facts and
    disconnected nodes all occur at the default densities."""
    node_count = rng.randint(1, max_nodes)
    names = [f"n{i}" for i in range(node_count)]
    edge_count = rng.randint(0, min(4 * node_count, node_count * node_count))
    edges = []
    for _ in range(edge_count):
        source = rng.choice(names)
        dest = rng.choice(names)  # == source sometimes: self-loop
        style = STYLE_DOTTED if rng.random() < 0.2 else STYLE_SOLID
        edges.append(RawEdge(source, dest, style, rng.choice(files)))
    if edges and rng.random() < 0.5:  # duplicated facts
        for _ in range(rng.randint(1, 3)):
            edges.append(rng.choice(edges))
    return edges


def edge_pairs(edges: list[RawEdge]) -> list[Pair]:
    return [(edge.source, edge.dest) for edge in edges]


def node_universe(edges: list[RawEdge]) -> list[str]:
    seen: dict[str, None] = {}
    for edge in edges:
        seen.setdefault(edge.source)
        seen.setdefault(edge.dest)
    return list(seen)


# -- random grammar derivations ---------------------------------------------------


def random_identifier(rng: random.Random) -> str:
    """Random name derivable from the quoted-identifier production."""
    lead = "_" * rng.choice((0, 0, 0, 0, 1, 1, 2))
    chunks = []
    for _ in range(rng.randint(1, 3)):
        length = rng.randint(1, 6)
        alphabet = "abcXYZ0189"
        chunk = "".join(rng.choice(alphabet) for _ in range(length))
        chunks.append(chunk)
    name = lead + "_".join(chunks)  # chunks start alphanumeric, as the name regex wants
    if rng.random() < 0.1:
        name += "_"
    return name


def random_derivation(rng: random.Random) -> str:
    """Random sentence of the dump grammar, with whitespace jitter.

    Returns text that must parse; statements include node declarations,
    edges with solid/dotted styles, and (rarely) edges with the style
    descriptor omitted, which parses with a warning.
    """

    def space(required: bool = False) -> str:
        if required:
            return rng.choice((" ", "  ", "\n", "\t ", " \n "))
        return rng.choice(("", " ", "  ", "\n", "\t"))

    out = [space(), "digraph", space(required=True), "callgraph", space(), "{"]
    for _ in range(rng.randint(0, 12)):
        kind = rng.random()
        out.append(space())
        if kind < 0.25:
            out += ['"', random_identifier(rng), '"', space(), ";"]
        else:
            out += ['"', random_identifier(rng), '"', space()]
            out += ["-", space(), ">", space()]
            out += ['"', random_identifier(rng), '"', space()]
            if kind < 0.9:
                style = "solid" if rng.random() < 0.8 else "dotted"
                out += ["[", space(), "style", space(), "=", space(), style,
                        space(), "]", space(), ";"]
            # else: no style descriptor at all - tolerated with a warning
    out += [space(), "}", space()]
    return "".join(out)


# -- wire format --------------------------------------------------------------


def parse_structured(body: str) -> dict:
    """Split a structured response into its header fields and answer lines."""
    lines = body.splitlines()
    head = lines[0].split(" ")
    return {
        "kind": head[0],
        "count": int(head[1]),
        "elapsed": float(head[2]),
        "version": int(head[3]),
        "cached": {"true": True, "false": False}[head[4]],
        "truncated": len(head) > 5 and head[5] == "truncated",
        "answers": lines[1:],
    }
