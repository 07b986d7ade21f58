"""Binary snapshot files and CSV tables.

Snapshot layout, all little-endian::

    b"GDNL"  u32 version  u64 n  f64 L  f64 t  f64 sigma   (40 bytes)
    n x (f64 re, f64 im)

The grid origin is not stored; snapshots always describe the box
``[-L/2, L/2)``.
"""

from __future__ import annotations

import csv
import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConsistencyError, SnapshotFormatError, SnapshotTruncatedError
from .grid import Field, Grid1D

__all__ = [
    "MAGIC",
    "VERSION",
    "SnapshotHeader",
    "write_snapshot",
    "read_snapshot",
    "read_snapshot_with_header",
    "format_float",
    "write_csv",
    "read_csv",
]

MAGIC = b"GDNL"
VERSION = 1
_HEADER = struct.Struct("<4sIQddd")


@dataclass(frozen=True)
class SnapshotHeader:
    version: int
    n: int
    length: float
    time: float
    sigma: float


def write_snapshot(f: Field, path, sigma: float) -> Path:
    g = f.grid
    if not math.isclose(g.origin, -0.5 * g.length, rel_tol=0, abs_tol=1e-12 * g.length):
        raise ConsistencyError("snapshot files only describe boxes centred at the origin")
    header = (g.length, f.time, sigma)
    if not all(math.isfinite(v) for v in header):
        raise SnapshotFormatError("header values must be finite")
    path = Path(path)
    payload = np.ascontiguousarray(f.samples, dtype="<c16").tobytes()
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, g.n, g.length, f.time, float(sigma)))
        fh.write(payload)
    return path


def read_snapshot_with_header(path) -> tuple:
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise SnapshotTruncatedError(f"{path}: {len(data)} bytes is shorter than the header")
    magic, version, n, length, t, sigma = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise SnapshotFormatError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise SnapshotFormatError(f"{path}: unsupported version {version}")
    if not all(math.isfinite(v) for v in (length, t, sigma)):
        raise SnapshotFormatError(f"{path}: non-finite header value")
    expected = _HEADER.size + 16 * n
    if len(data) < expected:
        raise SnapshotTruncatedError(
            f"{path}: payload has {len(data) - _HEADER.size} bytes, expected {16 * n}")
    if len(data) > expected:
        raise SnapshotFormatError(f"{path}: {len(data) - expected} trailing bytes")
    samples = np.frombuffer(data, dtype="<c16", count=n, offset=_HEADER.size).astype(complex)
    try:
        grid = Grid1D(int(n), length)
    except ValueError as exc:
        raise SnapshotFormatError(f"{path}: invalid grid in header ({exc})") from exc
    return Field(grid, t, samples), SnapshotHeader(version, int(n), length, t, sigma)


def read_snapshot(path) -> Field:
    return read_snapshot_with_header(path)[0]


def format_float(x) -> str:
    """17 significant digits, so every double round-trips."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def write_csv(path, header, rows) -> Path:
    """RFC-4180 table (CRLF line ends, minimal quoting, '.' decimals)."""
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(header)
        for row in rows:
            w.writerow([format_float(v) for v in row])
    return path


def read_csv(path) -> tuple:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]
