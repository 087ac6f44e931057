"""Binary snapshot of a call graph.

Loading a snapshot skips tokenizing and parsing entirely, which is the whole
point: restart a query server against a large graph in a fraction of the
ingest time.

Layout, little-endian throughout:

    magic           8 bytes  b"calldep\\0"
    format version  u32
    graph version   u64
    raw edge count  u64
    function count  u32
    file count      u32
    edge count      u32
    function names  count * (u32 length + utf-8 bytes)
    file paths      count * (u32 length + utf-8 bytes)
    edges           count * (u32 caller id, u32 callee id, u32 file id,
                             u8 style code, u32 multiplicity)
    checksum        u32 crc32 of everything above

Edges are stored in insertion order and replayed in that order, so a loaded
graph answers every query byte-for-byte like the one that was saved.
"""

from __future__ import annotations

import os
import struct
import zlib
from pathlib import Path

from .store import CallGraph, CODE_STYLES, STYLE_CODES

MAGIC = b"calldep\x00"
FORMAT_VERSION = 1

_HEADER = struct.Struct("<8sIQQIII")
_LEN = struct.Struct("<I")
_EDGE = struct.Struct("<IIIBI")
_CRC = struct.Struct("<I")


class SnapshotError(ValueError):
    """Raised when a snapshot file is unreadable, corrupt, or incompatible."""


def save_snapshot(graph: CallGraph, path: str | Path) -> int:
    """Write `graph` to `path`; returns the byte size written."""
    path = Path(path)
    with graph.read_lock():
        stats = graph.stats()
        functions = graph.functions()
        files = graph.files()
        rows = graph.edge_items()

    function_ids = {name: i for i, name in enumerate(functions)}
    file_ids = {name: i for i, name in enumerate(files)}

    parts = [
        _HEADER.pack(
            MAGIC,
            FORMAT_VERSION,
            stats.version,
            stats.raw_edge_count,
            len(functions),
            len(files),
            len(rows),
        )
    ]
    for name in functions:
        raw = name.encode("utf-8")
        parts.append(_LEN.pack(len(raw)))
        parts.append(raw)
    for name in files:
        raw = name.encode("utf-8")
        parts.append(_LEN.pack(len(raw)))
        parts.append(raw)
    for caller, callee, file, style, multiplicity in rows:
        parts.append(
            _EDGE.pack(
                function_ids[caller],
                function_ids[callee],
                file_ids[file],
                STYLE_CODES[style],
                multiplicity,
            )
        )
    body = b"".join(parts)
    blob = body + _CRC.pack(zlib.crc32(body))

    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(blob)
    os.replace(tmp, path)
    return len(blob)


def load_snapshot(path: str | Path) -> CallGraph:
    """Read a snapshot back into a fresh graph.

    The checksum is verified before anything is decoded, so a truncated or
    bit-flipped file fails with a checksum error rather than a garbled graph.
    """
    try:
        blob = Path(path).read_bytes()
    except OSError as exc:
        raise SnapshotError(f"cannot read snapshot: {exc}") from exc

    if len(blob) < _HEADER.size + _CRC.size:
        raise SnapshotError("checksum mismatch: file truncated")
    body, crc_bytes = blob[:-_CRC.size], blob[-_CRC.size:]
    if zlib.crc32(body) != _CRC.unpack(crc_bytes)[0]:
        raise SnapshotError("checksum mismatch: snapshot corrupt or truncated")

    magic, fmt, version, raw_edge_count, n_functions, n_files, n_edges = (
        _HEADER.unpack_from(body, 0)
    )
    if magic != MAGIC:
        raise SnapshotError("not a calldep snapshot (bad magic)")
    if fmt != FORMAT_VERSION:
        raise SnapshotError(
            f"snapshot format {fmt} not supported (expected {FORMAT_VERSION})"
        )

    offset = _HEADER.size

    def take_string() -> str:
        nonlocal offset
        (length,) = _LEN.unpack_from(body, offset)
        offset += _LEN.size
        raw = body[offset : offset + length]
        if len(raw) != length:
            raise SnapshotError("snapshot string table truncated")
        offset += length
        return raw.decode("utf-8")

    try:
        functions = [take_string() for _ in range(n_functions)]
        files = [take_string() for _ in range(n_files)]
        edge_block = body[offset : offset + n_edges * _EDGE.size]
        if len(edge_block) != n_edges * _EDGE.size:
            raise SnapshotError("snapshot edge table truncated")
        offset += len(edge_block)
        rows = []
        for caller, callee, file, style_code, multiplicity in _EDGE.iter_unpack(
            edge_block
        ):
            if caller >= n_functions or callee >= n_functions or file >= n_files:
                raise SnapshotError("snapshot edge row references unknown name id")
            rows.append((caller, callee, file, CODE_STYLES[style_code], multiplicity))
    except (struct.error, IndexError, KeyError, UnicodeDecodeError) as exc:
        raise SnapshotError(f"snapshot body malformed: {exc}") from exc
    if offset != len(body):
        raise SnapshotError("snapshot has trailing bytes")

    graph = CallGraph()
    graph._bulk_load(functions, files, rows, version, raw_edge_count)
    return graph
