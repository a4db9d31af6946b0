"""Binary snapshots of the lattice state.

Layout (little-endian): magic ``b"WMAP"``, u32 version, u32 N, f64 t,
u64 step, 32-byte config hash, then u, v, w, pu, pv, pw as N*N f64 each,
row-major with the first index along x.
"""
import struct
from dataclasses import dataclass

import numpy as np

from .dynamics import SimState

MAGIC = b"WMAP"
VERSION = 1
HEADER = struct.Struct("<4sIIdQ32s")
_F64 = np.dtype("<f8")


class SnapshotError(ValueError):
    pass


@dataclass(frozen=True)
class SnapshotHeader:
    version: int
    N: int
    t: float
    step: int
    config_hash: bytes

    @property
    def hash_hex(self):
        return self.config_hash.hex()


def encode(state: SimState, config_hash: bytes = b"\0" * 32) -> bytes:
    if len(config_hash) != 32:
        raise SnapshotError("config hash must be 32 bytes")
    n = state.q.shape[-1]
    head = HEADER.pack(MAGIC, VERSION, n, float(state.t), int(state.step), bytes(config_hash))
    body = np.concatenate([state.q, state.p]).astype(_F64, copy=False).tobytes(order="C")
    return head + body


def decode(data: bytes):
    if len(data) < HEADER.size:
        raise SnapshotError("truncated snapshot header")
    magic, version, n, t, step, chash = HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise SnapshotError(f"bad magic {magic!r}")
    if version != VERSION:
        raise SnapshotError(f"unsupported snapshot version {version}")
    expected = HEADER.size + 6 * n * n * 8
    if len(data) != expected:
        raise SnapshotError(f"snapshot size {len(data)} does not match N={n} (expected {expected})")
    arrays = np.frombuffer(data, dtype=_F64, offset=HEADER.size).reshape(6, n, n).astype(np.float64)
    header = SnapshotHeader(version, n, t, step, chash)
    return SimState(arrays[:3].copy(), arrays[3:].copy(), t=t, step=step), header


def write(path, state: SimState, config_hash: bytes = b"\0" * 32):
    with open(path, "wb") as fh:
        fh.write(encode(state, config_hash))


def read(path):
    with open(path, "rb") as fh:
        return decode(fh.read())


def read_header(path) -> SnapshotHeader:
    with open(path, "rb") as fh:
        data = fh.read(HEADER.size)
    if len(data) < HEADER.size:
        raise SnapshotError("truncated snapshot header")
    magic, version, n, t, step, chash = HEADER.unpack(data)
    if magic != MAGIC:
        raise SnapshotError(f"bad magic {magic!r}")
    return SnapshotHeader(version, n, t, step, chash)
