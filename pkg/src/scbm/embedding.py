"""Embedder boundary, deterministic synthetic embedder, and the binary
embedding file format.

File layout (little-endian throughout): magic ``SBEM`` | version u16 = 1 |
dim u32 | row count u64 | rows * dim float32 row-major | CRC32 (IEEE) of the
payload as u32. A sidecar ``<file>.idx.jsonl`` carries one JSON object per
row with the clip key.
"""

from __future__ import annotations

import hashlib
import json
import struct
import zlib
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from .core import BinaryLabel, ClipKey, ClipRecord, ClipStatus, EmbeddingMatrix
from .errors import ChecksumMismatch, DimMismatch, FormatError, InvariantError, MissingClip

MAGIC = b"SBEM"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sHIQ")

_LABEL_STR = {BinaryLabel.NORMAL: "normal", BinaryLabel.AD_AGING: "ad_aging"}
_STR_LABEL = {v: k for k, v in _LABEL_STR.items()}


@dataclass(frozen=True)
class EmbedderConfig:
    dim: int = 6144
    frame_rate: int = 10
    input_shape: tuple = (960, 752, 3)  # metadata only here

    def __post_init__(self):
        if self.dim <= 0:
            raise InvariantError(f"dim must be positive, got {self.dim}")
        if self.frame_rate not in (1, 10):
            raise InvariantError(f"frame_rate must be 1 or 10, got {self.frame_rate}")


@dataclass(frozen=True)
class SyntheticEmbedderSpec:
    """Gaussian class model per (scenario, binary label).

    means maps (scenario, BinaryLabel) to a mean vector; sigma is the shared
    isotropic standard deviation. Identical seed gives identical output.
    """

    dim: int
    means: Mapping[tuple[str, BinaryLabel], np.ndarray]
    sigma: float
    seed: int
    allow_zero_sigma: bool = False  # test-only escape hatch

    def __post_init__(self):
        if self.sigma < 0 or (self.sigma == 0 and not self.allow_zero_sigma):
            raise InvariantError(f"sigma must be > 0, got {self.sigma}")
        for key, mu in self.means.items():
            if np.asarray(mu).shape != (self.dim,):
                raise InvariantError(f"mean for {key} has wrong shape")

    def separation(self, scenario: str) -> float:
        """Planted centroid distance between the two classes of a scenario."""
        mu_n = np.asarray(self.means[(scenario, BinaryLabel.NORMAL)], dtype=np.float64)
        mu_a = np.asarray(self.means[(scenario, BinaryLabel.AD_AGING)], dtype=np.float64)
        return float(np.linalg.norm(mu_n - mu_a))


def planted_spec(
    dim: int,
    separations: Mapping[str, float],
    sigma: float,
    seed: int,
    allow_zero_sigma: bool = False,
) -> SyntheticEmbedderSpec:
    """Spec with normal class at the origin and the AD class offset along the
    first axis by the requested per-scenario separation."""
    means = {}
    for scenario, delta in separations.items():
        mu_n = np.zeros(dim)
        mu_a = np.zeros(dim)
        mu_a[0] = delta
        means[(scenario, BinaryLabel.NORMAL)] = mu_n
        means[(scenario, BinaryLabel.AD_AGING)] = mu_a
    return SyntheticEmbedderSpec(
        dim=dim, means=means, sigma=sigma, seed=seed, allow_zero_sigma=allow_zero_sigma
    )


def _clip_rng(seed: int, subject: str, drive: str, clip: str) -> np.random.Generator:
    # Stream keyed on (seed, clip identity) so parallel generation order
    # cannot change the result.
    digest = hashlib.sha256(f"{seed}|{subject}|{drive}|{clip}".encode()).digest()
    return np.random.default_rng(int.from_bytes(digest[:16], "little"))


class SyntheticEmbedder:
    """Deterministic stand-in for the vision encoder: draws each clip's
    vector from its (scenario, label) Gaussian."""

    def __init__(self, spec: SyntheticEmbedderSpec):
        self.spec = spec

    def embed(self, clip: ClipRecord, label: BinaryLabel) -> np.ndarray:
        if clip.status is ClipStatus.MISSING:
            raise MissingClip(f"clip {clip.clip} has missing video")
        key = (clip.scenario, label)
        if key not in self.spec.means:
            raise InvariantError(f"no synthetic model for {key}")
        rng = _clip_rng(self.spec.seed, clip.subject, clip.drive, clip.clip)
        mu = np.asarray(self.spec.means[key], dtype=np.float64)
        vec = mu + self.spec.sigma * rng.standard_normal(self.spec.dim)
        return vec.astype(np.float32)

    def embed_all(
        self, clips: Sequence[ClipRecord], labels: Mapping[str, BinaryLabel]
    ) -> EmbeddingMatrix:
        """Embed every clip; labels maps subject id to its binary label."""
        keys = []
        rows = np.empty((len(clips), self.spec.dim), dtype=np.float32)
        for i, c in enumerate(clips):
            lab = labels[c.subject]
            rows[i] = self.embed(c, lab)
            keys.append(ClipKey(c.subject, c.drive, c.clip, c.scenario, lab))
        return EmbeddingMatrix(keys, rows)


def write_embeddings(matrix: EmbeddingMatrix, path) -> None:
    payload = np.ascontiguousarray(matrix.vectors, dtype="<f4").tobytes()
    header = _HEADER.pack(MAGIC, FORMAT_VERSION, matrix.dim, len(matrix))
    crc = zlib.crc32(payload) & 0xFFFFFFFF
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload)
        fh.write(struct.pack("<I", crc))
    with open(str(path) + ".idx.jsonl", "w", encoding="utf-8") as fh:
        for row, k in enumerate(matrix.keys):
            fh.write(
                json.dumps(
                    {
                        "row": row,
                        "subject": k.subject,
                        "drive": k.drive,
                        "clip": k.clip,
                        "scenario": k.scenario,
                        "label": _LABEL_STR[k.label],
                    },
                    separators=(",", ":"),
                )
                + "\n"
            )


def read_embeddings(path) -> EmbeddingMatrix:
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < _HEADER.size:
        raise FormatError(0, "file shorter than header")
    magic, version, dim, rows = _HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise FormatError(0, f"bad magic {magic!r}")
    if version != FORMAT_VERSION:
        raise FormatError(4, f"unsupported version {version}")
    payload_len = rows * dim * 4
    expected_len = _HEADER.size + payload_len + 4
    if len(data) != expected_len:
        raise FormatError(len(data), f"expected {expected_len} bytes, got {len(data)}")
    payload = data[_HEADER.size : _HEADER.size + payload_len]
    (crc_stored,) = struct.unpack_from("<I", data, _HEADER.size + payload_len)
    if zlib.crc32(payload) & 0xFFFFFFFF != crc_stored:
        raise ChecksumMismatch(f"{path}: payload CRC mismatch")
    vectors = np.frombuffer(payload, dtype="<f4").reshape(rows, dim).copy()

    keys = []
    idx_path = str(path) + ".idx.jsonl"
    with open(idx_path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh):
            obj = json.loads(line)
            if obj["row"] != lineno:
                raise FormatError(lineno, f"{idx_path}: row index out of order")
            keys.append(
                ClipKey(
                    subject=obj["subject"],
                    drive=obj["drive"],
                    clip=obj["clip"],
                    scenario=obj["scenario"],
                    label=_STR_LABEL[obj["label"]],
                )
            )
    if len(keys) != rows:
        raise FormatError(rows, f"{idx_path}: {len(keys)} index rows for {rows} data rows")
    return EmbeddingMatrix(keys, vectors)
