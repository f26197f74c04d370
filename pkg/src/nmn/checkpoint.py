"""Flat binary checkpoint container for named fp32 tensors.

Layout (all integers little-endian):

    bytes 0..3    magic b"YATK"
    bytes 4..7    format version (u32, currently 1)
    bytes 8..11   tensor count (u32)
    table         per tensor: name length (u16), name bytes (utf-8),
                  ndim (u8), each dim (u64), absolute payload offset (u64)
    payload       float32 little-endian tensor data, C order, in table order

Round trips are bit-exact: save -> load -> save reproduces the file
byte for byte.
"""

from __future__ import annotations

import struct

import numpy as np

__all__ = ["MAGIC", "VERSION", "save_checkpoint", "load_checkpoint"]

MAGIC = b"YATK"
VERSION = 1


def save_checkpoint(path, named_tensors):
    """Write a ``{name: array}`` mapping (insertion-ordered) to ``path``."""
    items = [(str(n), np.ascontiguousarray(np.asarray(v), dtype="<f4"))
             for n, v in (named_tensors.items() if hasattr(named_tensors, "items")
                          else named_tensors)]
    table_size = 0
    for name, v in items:
        table_size += 2 + len(name.encode("utf-8")) + 1 + 8 * v.ndim + 8
    offset = 12 + table_size
    header = bytearray()
    header += MAGIC
    header += struct.pack("<II", VERSION, len(items))
    offsets = []
    for name, v in items:
        nb = name.encode("utf-8")
        header += struct.pack("<H", len(nb)) + nb
        header += struct.pack("<B", v.ndim)
        for dim in v.shape:
            header += struct.pack("<Q", dim)
        header += struct.pack("<Q", offset)
        offsets.append(offset)
        offset += v.nbytes
    with open(path, "wb") as f:
        f.write(header)
        for _, v in items:
            f.write(v.tobytes())


def load_checkpoint(path):
    """Read a checkpoint back into an ordered ``{name: float32 array}`` dict."""
    with open(path, "rb") as f:
        blob = f.read()
    if blob[:4] != MAGIC:
        raise ValueError(f"not a checkpoint: expected magic {MAGIC!r}, got {blob[:4]!r}")
    version, count = struct.unpack_from("<II", blob, 4)
    if version != VERSION:
        raise ValueError(f"unsupported checkpoint version {version} (expected {VERSION})")
    pos = 12
    entries = []
    for _ in range(count):
        (name_len,) = struct.unpack_from("<H", blob, pos)
        pos += 2
        name = blob[pos:pos + name_len].decode("utf-8")
        pos += name_len
        (ndim,) = struct.unpack_from("<B", blob, pos)
        pos += 1
        shape = struct.unpack_from(f"<{ndim}Q", blob, pos) if ndim else ()
        pos += 8 * ndim
        (offset,) = struct.unpack_from("<Q", blob, pos)
        pos += 8
        entries.append((name, tuple(int(s) for s in shape), offset))
    out = {}
    for name, shape, offset in entries:
        n_elems = int(np.prod(shape)) if shape else 1
        end = offset + 4 * n_elems
        if end > len(blob):
            raise ValueError(f"truncated checkpoint: tensor {name!r} runs past end of file")
        arr = np.frombuffer(blob, dtype="<f4", count=n_elems, offset=offset)
        out[name] = arr.reshape(shape).copy()
    return out
