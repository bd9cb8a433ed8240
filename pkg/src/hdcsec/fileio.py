"""Binary artifact plumbing: CRC-32C, packing helpers, atomic writes.

Model and key files end with a CRC-32C (Castagnoli) of every preceding
byte; hypervectors are serialized as little-endian 64-bit words with +1
mapped to bit 1, matching the in-memory packing.
"""

from __future__ import annotations

import json
import os
import tempfile

import numpy as np

from .errors import FormatError
from .hv import Hypervector, _n_words

_CRC32C_POLY = 0x82F63B78


def _make_table() -> np.ndarray:
    table = np.zeros(256, dtype=np.uint32)
    for i in range(256):
        crc = i
        for _ in range(8):
            crc = (crc >> 1) ^ _CRC32C_POLY if crc & 1 else crc >> 1
        table[i] = crc
    return table


_TABLE = _make_table()
_TABLE_LIST = [int(x) for x in _TABLE]


def crc32c(data: bytes, crc: int = 0) -> int:
    """CRC-32C (Castagnoli) of `data`, chainable via the `crc` argument."""
    table = _TABLE_LIST
    crc ^= 0xFFFFFFFF
    for b in data:
        crc = table[(crc ^ b) & 0xFF] ^ (crc >> 8)
    return crc ^ 0xFFFFFFFF


def pack_hv_bytes(hv: Hypervector) -> bytes:
    return hv.words.astype("<u8").tobytes()


def unpack_hv_bytes(buf: bytes, dim: int) -> Hypervector:
    nw = _n_words(dim)
    if len(buf) != nw * 8:
        raise FormatError(f"hypervector payload is {len(buf)} bytes, expected {nw * 8}")
    words = np.frombuffer(buf, dtype="<u8").astype(np.uint64)
    return Hypervector(dim, words)


def hv_record_size(dim: int) -> int:
    return _n_words(dim) * 8


def atomic_write_bytes(path: str, data: bytes) -> None:
    """Write via a temp file in the same directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_json(path: str, obj) -> None:
    """Deterministic JSON (sorted keys, fixed separators), written atomically."""
    text = json.dumps(obj, sort_keys=True, indent=2, separators=(",", ": "))
    atomic_write_bytes(path, (text + "\n").encode("utf-8"))


def read_checked(path: str, magic: bytes) -> memoryview:
    """Read a file, verify magic and trailing CRC-32C, return the body.

    The returned view covers everything after the magic and before the
    checksum.
    """
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < len(magic) + 4:
        raise FormatError(f"{path}: file too short")
    if blob[: len(magic)] != magic:
        raise FormatError(f"{path}: bad magic {blob[:len(magic)]!r}, expected {magic!r}")
    stored = int.from_bytes(blob[-4:], "little")
    actual = crc32c(blob[:-4])
    if stored != actual:
        raise FormatError(f"{path}: checksum mismatch (stored {stored:#x}, computed {actual:#x})")
    return memoryview(blob)[len(magic) : -4]


def finish_checked(magic: bytes, body: bytes) -> bytes:
    """Assemble magic + body + CRC-32C trailer."""
    blob = magic + body
    return blob + crc32c(blob).to_bytes(4, "little")
