"""Checkpoint container and pretrained word-vector loading.

Checkpoint layout: magic, format version, a JSON header describing the
config and every parameter (name + shape, in order), then the raw
little-endian float64 buffers concatenated in header order. Round-trips
are bit-exact.
"""

from __future__ import annotations

import json
import struct

import numpy as np

from ..errors import ParseError
from .engine import DTYPE, Parameter

MAGIC = b"FFCP"
VERSION = 1


def save_checkpoint(path, params: list[Parameter], config: dict | None = None) -> None:
    header = {
        "config": config or {},
        "params": [{"name": p.name, "shape": list(p.value.shape)} for p in params],
    }
    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", VERSION))
        fh.write(struct.pack("<Q", len(header_bytes)))
        fh.write(header_bytes)
        for p in params:
            fh.write(np.ascontiguousarray(p.value, dtype="<f8").tobytes())


def load_checkpoint(path) -> tuple[dict, dict[str, np.ndarray]]:
    """Returns (config dict, name -> array in file order)."""
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != MAGIC:
            raise ParseError(f"{path}: not a checkpoint file (bad magic {magic!r})")
        (version,) = struct.unpack("<I", fh.read(4))
        if version != VERSION:
            raise ParseError(f"{path}: unsupported checkpoint version {version}")
        (header_len,) = struct.unpack("<Q", fh.read(8))
        try:
            header = json.loads(fh.read(header_len).decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise ParseError(f"{path}: corrupt checkpoint header: {exc}") from exc
        arrays = {}
        for entry in header["params"]:
            shape = tuple(entry["shape"])
            count = int(np.prod(shape)) if shape else 1
            raw = fh.read(count * 8)
            if len(raw) != count * 8:
                raise ParseError(f"{path}: truncated data for parameter {entry['name']!r}")
            arrays[entry["name"]] = np.frombuffer(raw, dtype="<f8").reshape(shape).astype(DTYPE)
    return header.get("config", {}), arrays


def load_word_vectors(path, dim: int) -> dict[str, np.ndarray]:
    """Text embeddings: one line per word, `word v1 ... v_dim`.

    Lines whose vector length differs from `dim` are rejected. A leading
    `count dim` header line (common in this format) is skipped if present.
    """
    vectors: dict[str, np.ndarray] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.rstrip("\n").split(" ")
            if lineno == 1 and len(parts) == 2:
                continue  # dimension header
            if len(parts) < 2:
                continue
            word, values = parts[0], parts[1:]
            if len(values) != dim:
                raise ParseError(
                    f"{path}:{lineno}: expected {dim} values for {word!r}, got {len(values)}"
                )
            try:
                vectors[word] = np.array([float(v) for v in values], dtype=DTYPE)
            except ValueError as exc:
                raise ParseError(f"{path}:{lineno}: non-numeric vector entry: {exc}") from exc
    return vectors
