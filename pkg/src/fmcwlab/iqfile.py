"""Bit-exact IQ capture file format.

32-byte header: magic "MRIQ", format version (u32 LE), sample rate in Hz
(f64 LE), start time in seconds (f64 LE), sample count (u64 LE); payload is
interleaved float32 LE (I, Q) pairs.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .waveforms import IQBuffer

MAGIC = b"MRIQ"
VERSION = 1
_HEADER = struct.Struct("<4sIddQ")


class IQFileError(IOError):
    """Malformed or truncated IQ file."""


def write_iq(path, buf: IQBuffer) -> None:
    samples = np.asarray(buf.samples, dtype=np.complex64)
    header = _HEADER.pack(MAGIC, VERSION, float(buf.rate), float(buf.t0),
                          len(samples))
    with open(path, "wb") as f:
        f.write(header)
        f.write(samples.astype("<c8").tobytes())


def read_iq(path) -> IQBuffer:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise IQFileError("file shorter than the 32-byte header")
    magic, version, rate, t0, count = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise IQFileError(f"bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise IQFileError(f"unsupported format version {version}")
    payload = raw[_HEADER.size:]
    expected = count * 8
    if len(payload) < expected:
        raise IQFileError(
            f"truncated payload: {len(payload)} bytes, expected {expected}")
    samples = np.frombuffer(payload[:expected], dtype="<c8").astype(np.complex128)
    return IQBuffer(samples, rate, t0=t0)
