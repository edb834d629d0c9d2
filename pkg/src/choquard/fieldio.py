"""Binary field files.

Layout (little-endian): magic "CHQF", u8 version = 1, u8 d, u64 n, f64 L,
then n^d complex samples as (f64 re, f64 im) pairs in row-major order.
Round-trips are bit-identical.
"""

import struct

import numpy as np

from .errors import FieldFormatError
from .grids import Field, Grid

MAGIC = b"CHQF"
VERSION = 1
_HEADER = struct.Struct("<4sBBQd")


def save_field(path, field: Field) -> None:
    vals = np.ascontiguousarray(field.values, dtype="<c16")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, field.grid.d, field.grid.n,
                              field.grid.L))
        fh.write(vals.tobytes())


def load_field(path) -> Field:
    with open(path, "rb") as fh:
        head = fh.read(_HEADER.size)
        if len(head) < _HEADER.size:
            raise FieldFormatError("truncated header")
        magic, version, d, n, L = _HEADER.unpack(head)
        if magic != MAGIC:
            raise FieldFormatError(f"bad magic {magic!r}, expected {MAGIC!r}")
        if version != VERSION:
            raise FieldFormatError(f"unsupported version {version}")
        grid = Grid(int(d), int(n), float(L))
        data = fh.read(16 * grid.npts + 1)
        if len(data) != 16 * grid.npts:
            raise FieldFormatError(
                f"payload has {len(data)} bytes, expected {16 * grid.npts}")
    vals = np.frombuffer(data, dtype="<c16").astype(np.complex128)
    return Field(grid, vals.reshape(grid.shape))
