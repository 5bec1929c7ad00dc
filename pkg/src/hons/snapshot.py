"""Binary snapshots of a PairState.

Layout (all little-endian):

    offset 0   4 bytes   magic b"HNLS"
    offset 4   u32       format version (1)
    offset 8   u64       N
    offset 16  f64       time
    offset 24  N x (f64 re, f64 im)   u coefficients, ascending wavenumber -N/2 .. N/2-1
    then       N x (f64 re, f64 im)   w coefficients, same order
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .grid import PairState, PeriodicGrid

MAGIC = b"HNLS"
VERSION = 1
_HEADER = struct.Struct("<4sIQd")


class SnapshotFormatError(ValueError):
    def __init__(self, message: str, offset: int):
        self.offset = offset
        super().__init__(f"{message} (byte offset {offset})")


def encode_snapshot(state: PairState) -> bytes:
    g = state.grid
    order = g.ascending_order
    body = np.concatenate([state.u.coeffs[order], state.w.coeffs[order]]).astype("<c16")
    return _HEADER.pack(MAGIC, VERSION, g.n_modes, float(state.time)) + body.tobytes()


def decode_snapshot(data: bytes) -> PairState:
    if len(data) < _HEADER.size:
        raise SnapshotFormatError(f"truncated header: {len(data)} of {_HEADER.size} bytes", len(data))
    magic, version, n, t = _HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise SnapshotFormatError(f"bad magic {magic!r}, expected {MAGIC!r}", 0)
    if version != VERSION:
        raise SnapshotFormatError(f"unsupported version {version}, expected {VERSION}", 4)
    if n < 8 or n % 2 or n > 2**31:
        raise SnapshotFormatError(f"invalid mode count {n}", 8)
    need = _HEADER.size + 2 * n * 16
    if len(data) < need:
        raise SnapshotFormatError(f"truncated body: file has {len(data)} bytes, expected {need}", len(data))
    if len(data) > need:
        raise SnapshotFormatError(f"{len(data) - need} trailing bytes", need)
    body = np.frombuffer(data, dtype="<c16", count=2 * n, offset=_HEADER.size).astype(np.complex128)
    grid = PeriodicGrid(int(n))
    u = np.empty(n, dtype=np.complex128)
    w = np.empty(n, dtype=np.complex128)
    u[grid.ascending_order] = body[:n]
    w[grid.ascending_order] = body[n:]
    return PairState.from_arrays(grid, u, w, t)


def write_snapshot(state: PairState, path: str | Path) -> None:
    Path(path).write_bytes(encode_snapshot(state))


def read_snapshot(path: str | Path) -> PairState:
    return decode_snapshot(Path(path).read_bytes())
