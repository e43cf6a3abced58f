"""Binary snapshot format ``AFLD0001``.

Layout (little endian): 8-byte magic, u32 d, d x u64 N_j, d x f64 L_j,
f64 time, then prod(N_j) complex samples as interleaved f64 (re, im) in
row-major order with x1 slowest.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .grid import Field, Grid

MAGIC = b"AFLD0001"


class AfldFormatError(ValueError):
    pass


def encode(f: Field) -> bytes:
    g = f.grid
    header = MAGIC + struct.pack("<I", g.d)
    header += struct.pack(f"<{g.d}Q", *g.n_points)
    header += struct.pack(f"<{g.d}d", *g.half_length)
    header += struct.pack("<d", f.time)
    body = np.ascontiguousarray(f.values, dtype="<c16").tobytes()
    return header + body


def decode(data: bytes) -> Field:
    if len(data) < 12 or data[:8] != MAGIC:
        raise AfldFormatError("bad magic: not an AFLD0001 stream")
    (d,) = struct.unpack_from("<I", data, 8)
    if d not in (1, 2, 3):
        raise AfldFormatError(f"unsupported dimension {d}")
    off = 12
    need = off + 8 * d + 8 * d + 8
    if len(data) < need:
        raise AfldFormatError("truncated header")
    n = struct.unpack_from(f"<{d}Q", data, off)
    off += 8 * d
    L = struct.unpack_from(f"<{d}d", data, off)
    off += 8 * d
    (time,) = struct.unpack_from("<d", data, off)
    off += 8
    count = int(np.prod(n))
    if len(data) - off != 16 * count:
        raise AfldFormatError(f"payload holds {len(data) - off} bytes, expected {16 * count}")
    values = np.frombuffer(data, dtype="<c16", count=count, offset=off).astype(complex)
    return Field(Grid(tuple(L), tuple(int(v) for v in n)), values.reshape(n), time)


def write_field(path: str | Path, f: Field) -> None:
    Path(path).write_bytes(encode(f))


def read_field(path: str | Path) -> Field:
    return decode(Path(path).read_bytes())
