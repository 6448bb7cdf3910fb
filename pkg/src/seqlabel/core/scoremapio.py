"""SMP1 score map codec.

Layout: ASCII magic "SMP1"; u32 LE width, height, n_cl; then n_cl planes
of width*height IEEE-754 f32 LE, row-major, plane order = class 1..n_cl
(background has no plane). Round-trips preserve full 32-bit precision.
"""
from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from ..errors import (
    BadMagic,
    InvariantViolation,
    MissingFile,
    NonFiniteValue,
    TruncatedFile,
    ValueOutOfRange,
)
from .types import ScoreMap

MAGIC = b"SMP1"
_HEADER = struct.Struct("<III")


def encode_scoremap(smap: ScoreMap) -> bytes:
    header = MAGIC + _HEADER.pack(smap.width, smap.height, smap.n_cl)
    return header + smap.planes.astype("<f4").tobytes()


def decode_scoremap(data: bytes) -> ScoreMap:
    if len(data) < 4 or data[:4] != MAGIC:
        raise BadMagic(f"expected magic {MAGIC!r}, got {data[:4]!r}")
    if len(data) < 4 + _HEADER.size:
        raise TruncatedFile(f"header truncated: {len(data)} bytes")
    width, height, n_cl = _HEADER.unpack_from(data, 4)
    if width < 1 or height < 1 or n_cl < 1:
        raise InvariantViolation(
            f"dimensions must be positive, got {width}x{height}x{n_cl}"
        )
    expected = width * height * n_cl * 4
    payload = data[4 + _HEADER.size:]
    if len(payload) != expected:
        raise TruncatedFile(
            f"expected {expected} payload bytes ({width}*{height}*{n_cl}*4), got {len(payload)}"
        )
    planes = np.frombuffer(payload, dtype="<f4").reshape(n_cl, height, width)
    if not np.isfinite(planes).all():
        raise NonFiniteValue("score map contains non-finite values")
    if planes.min() < 0.0 or planes.max() > 1.0:
        raise ValueOutOfRange("score map values must lie in [0, 1]")
    return ScoreMap(planes.astype(np.float32))


def read_scoremap(path: Path | str) -> ScoreMap:
    path = Path(path)
    if not path.is_file():
        raise MissingFile(f"score map file not found: {path}")
    return decode_scoremap(path.read_bytes())


def write_scoremap(smap: ScoreMap, path: Path | str) -> None:
    Path(path).write_bytes(encode_scoremap(smap))
