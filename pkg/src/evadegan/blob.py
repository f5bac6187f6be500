"""Versioned binary blobs for model checkpoints.

Layout: 8-byte magic, 4-byte little-endian header length, a UTF-8 JSON
header (format version, array names/shapes, arbitrary metadata), then the
named float64 arrays concatenated in header order, little-endian.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

MAGIC = b"EVGBLOB1"
FORMAT_VERSION = 1


def save_blob(path, arrays: dict, meta: dict | None = None) -> None:
    """Write named float64 arrays plus a JSON metadata header."""
    header = {
        "format_version": FORMAT_VERSION,
        "arrays": [{"name": k, "shape": list(np.asarray(v).shape)} for k, v in arrays.items()],
        "meta": meta or {},
    }
    payload = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", len(payload)))
        fh.write(payload)
        for value in arrays.values():
            fh.write(np.ascontiguousarray(value, dtype="<f8").tobytes())


def load_blob(path):
    """Read a blob back as (arrays dict, meta dict)."""
    raw = Path(path).read_bytes()
    if raw[: len(MAGIC)] != MAGIC:
        raise ValueError(f"{path}: not a checkpoint blob")
    (hlen,) = struct.unpack_from("<I", raw, len(MAGIC))
    start = len(MAGIC) + 4
    header = json.loads(raw[start : start + hlen].decode("utf-8"))
    if header["format_version"] != FORMAT_VERSION:
        raise ValueError(f"{path}: unsupported blob version {header['format_version']}")
    offset = start + hlen
    arrays = {}
    for entry in header["arrays"]:
        shape = tuple(entry["shape"])
        count = int(np.prod(shape)) if shape else 1
        arr = np.frombuffer(raw, dtype="<f8", count=count, offset=offset)
        arrays[entry["name"]] = arr.reshape(shape).astype(float)
        offset += count * 8
    return arrays, header["meta"]
