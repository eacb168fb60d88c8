"""Versioned checkpoint container: magic "OMND", u32 version, JSON metadata,
then a named little-endian tensor table.

Layout (all integers little-endian):
    magic      4 bytes  b"OMND"
    version    u32
    meta_len   u64      followed by meta_len bytes of UTF-8 JSON
    n_tensors  u32
    per tensor:
        name_len u16, name bytes (UTF-8)
        dtype_len u8, dtype tag (e.g. "f32", "f64", "i64")
        ndim u8, ndim x u64 dims
        raw little-endian payload
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

MAGIC = b"OMND"
VERSION = 1

_DTYPE_TAGS = {"f32": "<f4", "f64": "<f8", "i64": "<i8"}
_TAG_FOR = {np.dtype("float32"): "f32", np.dtype("float64"): "f64", np.dtype("int64"): "i64"}


class CheckpointError(ValueError):
    pass


def write_checkpoint(path, metadata: dict, tensors: dict[str, np.ndarray]) -> None:
    path = Path(path)
    meta = json.dumps(metadata, sort_keys=True).encode("utf-8")
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<I", VERSION))
        f.write(struct.pack("<Q", len(meta)))
        f.write(meta)
        f.write(struct.pack("<I", len(tensors)))
        for name, arr in tensors.items():
            arr = np.ascontiguousarray(arr)
            if arr.dtype not in _TAG_FOR:
                raise CheckpointError(f"unsupported dtype {arr.dtype} for tensor {name!r}")
            tag = _TAG_FOR[arr.dtype]
            nb = name.encode("utf-8")
            f.write(struct.pack("<H", len(nb)))
            f.write(nb)
            f.write(struct.pack("<B", len(tag)))
            f.write(tag.encode("ascii"))
            f.write(struct.pack("<B", arr.ndim))
            for d in arr.shape:
                f.write(struct.pack("<Q", d))
            f.write(arr.astype(_DTYPE_TAGS[tag], copy=False).tobytes())


def read_checkpoint(path) -> tuple[dict, dict[str, np.ndarray]]:
    path = Path(path)
    with open(path, "rb") as f:
        if f.read(4) != MAGIC:
            raise CheckpointError(f"{path} is not an OMND checkpoint")
        (version,) = struct.unpack("<I", f.read(4))
        if version != VERSION:
            raise CheckpointError(f"unsupported checkpoint version {version}")
        (meta_len,) = struct.unpack("<Q", f.read(8))
        metadata = json.loads(f.read(meta_len).decode("utf-8"))
        (n_tensors,) = struct.unpack("<I", f.read(4))
        tensors: dict[str, np.ndarray] = {}
        for _ in range(n_tensors):
            (name_len,) = struct.unpack("<H", f.read(2))
            name = f.read(name_len).decode("utf-8")
            (tag_len,) = struct.unpack("<B", f.read(1))
            tag = f.read(tag_len).decode("ascii")
            if tag not in _DTYPE_TAGS:
                raise CheckpointError(f"unknown dtype tag {tag!r} for tensor {name!r}")
            (ndim,) = struct.unpack("<B", f.read(1))
            shape = tuple(struct.unpack("<Q", f.read(8))[0] for _ in range(ndim))
            count = int(np.prod(shape)) if shape else 1
            arr = np.frombuffer(
                f.read(count * np.dtype(_DTYPE_TAGS[tag]).itemsize), dtype=_DTYPE_TAGS[tag]
            ).reshape(shape)
            tensors[name] = arr.copy()
    return metadata, tensors
