"""Binary parameter container.

Layout (little-endian)::

    magic      8 bytes  b"HTPARSE\\0"
    version    u32
    meta_len   u32, then meta_len bytes of UTF-8 "key=<json>" lines
    count      u32
    count x    name_len u32, name bytes, rank u32, dims u64 * rank,
               float64 * prod(dims)
"""

from __future__ import annotations

import io
import json
import struct
from pathlib import Path
from typing import BinaryIO

import numpy as np

from .params import ParamStore

MAGIC = b"HTPARSE\x00"
VERSION = 1


class ModelFileError(Exception):
    pass


class FormatError(ModelFileError):
    pass


class VersionError(ModelFileError):
    pass


class TruncatedError(ModelFileError):
    pass


class ShapeMismatchError(ModelFileError):
    pass


def _encode_meta(meta: dict) -> bytes:
    lines = []
    for key, value in meta.items():
        if "=" in key or "\n" in key:
            raise ValueError(f"invalid metadata key {key!r}")
        lines.append(f"{key}={json.dumps(value, sort_keys=True)}")
    return "\n".join(lines).encode("utf-8")


def _decode_meta(raw: bytes) -> dict:
    meta = {}
    text = raw.decode("utf-8")
    for line in text.split("\n") if text else []:
        key, _, value = line.partition("=")
        meta[key] = json.loads(value)
    return meta


def save_params(store: ParamStore, path, meta: dict | None = None) -> None:
    buf = io.BytesIO()
    buf.write(MAGIC)
    buf.write(struct.pack("<I", VERSION))
    raw = _encode_meta(meta or {})
    buf.write(struct.pack("<I", len(raw)))
    buf.write(raw)
    params = list(store)
    buf.write(struct.pack("<I", len(params)))
    for p in params:
        name = p.name.encode("utf-8")
        buf.write(struct.pack("<I", len(name)))
        buf.write(name)
        buf.write(struct.pack("<I", p.value.ndim))
        buf.write(struct.pack(f"<{p.value.ndim}Q", *p.value.shape))
        buf.write(np.ascontiguousarray(p.value, dtype="<f8").tobytes())
    Path(path).write_bytes(buf.getvalue())


def _read(f: BinaryIO, n: int) -> bytes:
    data = f.read(n)
    if len(data) != n:
        raise TruncatedError(f"expected {n} bytes, file ended after {len(data)}")
    return data


def _read_header(f: BinaryIO, path) -> dict:
    head = f.read(len(MAGIC))
    if head != MAGIC:
        raise FormatError(f"{path}: not a parser model file (bad magic bytes)")
    (version,) = struct.unpack("<I", _read(f, 4))
    if version != VERSION:
        raise VersionError(f"{path}: unsupported format version {version} (expected {VERSION})")
    (meta_len,) = struct.unpack("<I", _read(f, 4))
    return _decode_meta(_read(f, meta_len))


def _peek_meta(path) -> dict:
    with open(path, "rb") as f:
        return _read_header(f, path)


def load_params(path, template: ParamStore | None = None) -> tuple[ParamStore, dict]:
    """Read a container written by :func:`save_params`.

    When ``template`` is given its parameters are overwritten in place and
    every tensor must match the template's name set and shapes.
    """
    with open(path, "rb") as f:
        meta = _read_header(f, path)
        (count,) = struct.unpack("<I", _read(f, 4))
        tensors = {}
        for _ in range(count):
            (name_len,) = struct.unpack("<I", _read(f, 4))
            name = _read(f, name_len).decode("utf-8")
            (rank,) = struct.unpack("<I", _read(f, 4))
            dims = struct.unpack(f"<{rank}Q", _read(f, 8 * rank))
            size = int(np.prod(dims)) if rank else 1
            data = np.frombuffer(_read(f, 8 * size), dtype="<f8").astype(np.float64)
            tensors[name] = data.reshape(dims)
        if f.read(1):
            raise FormatError(f"{path}: trailing bytes after last tensor")

    if template is None:
        store = ParamStore()
        for name, value in tensors.items():
            store.add_value(name, value)
        return store, meta

    if set(tensors) != set(template.names()):
        missing = sorted(set(template.names()) - set(tensors))
        extra = sorted(set(tensors) - set(template.names()))
        raise ShapeMismatchError(f"{path}: parameter set differs (missing {missing}, unexpected {extra})")
    for p in template:
        value = tensors[p.name]
        if value.shape != p.value.shape:
            raise ShapeMismatchError(
                f"{path}: {p.name} has shape {value.shape}, configuration expects {p.value.shape}")
    for p in template:
        p.value[...] = tensors[p.name]
    return template, meta
