"""Writer for the binary scenario-embedding format.

Layout (little-endian): magic ``SBEM`` | version u16 = 1 | dim u32 |
row count u64 | rows * dim float32 row-major | CRC32 (IEEE) of the payload
as u32. Sidecar ``<file>.idx.jsonl`` holds one JSON object per row with the
clip key; ``<file>.meta.json`` records the extraction recipe.
"""

from __future__ import annotations

import json
import struct
import zlib

import numpy as np

MAGIC = b"SBEM"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sHIQ")

LABELS = ("normal", "ad_aging")


def write_sbem(vectors: np.ndarray, entries, path) -> None:
    """vectors: (rows, dim) float32; entries: per-row dicts with keys
    subject, drive, clip, scenario, label."""
    vectors = np.ascontiguousarray(vectors, dtype="<f4")
    rows, dim = vectors.shape
    if len(entries) != rows:
        raise ValueError(f"{len(entries)} index entries for {rows} rows")
    payload = vectors.tobytes()
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, FORMAT_VERSION, dim, rows))
        fh.write(payload)
        fh.write(struct.pack("<I", zlib.crc32(payload) & 0xFFFFFFFF))
    with open(str(path) + ".idx.jsonl", "w", encoding="utf-8") as fh:
        for row, e in enumerate(entries):
            if e["label"] not in LABELS:
                raise ValueError(f"bad label {e['label']!r} for row {row}")
            obj = {
                "row": row,
                "subject": e["subject"],
                "drive": e["drive"],
                "clip": e["clip"],
                "scenario": e["scenario"],
                "label": e["label"],
            }
            fh.write(json.dumps(obj, separators=(",", ":")) + "\n")


def write_meta(meta: dict, path) -> None:
    with open(str(path) + ".meta.json", "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
