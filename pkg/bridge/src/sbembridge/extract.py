"""Manifest-driven extraction: video clips -> one embedding file."""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass

import numpy as np

from .config import RECIPE, BridgeConfig
from .encoder import FrameEncoder
from .errors import DecodeError, ManifestError
from .frames import sample_frames
from .sbem import LABELS, write_meta, write_sbem

REQUIRED_COLUMNS = ("subject_id", "drive_id", "clip_id", "scenario")


@dataclass(frozen=True)
class ManifestRow:
    subject: str
    drive: str
    clip: str
    scenario: str
    label: str      # "normal" | "ad_aging"
    filename: str   # video file relative to the videos directory


def load_manifest(path) -> list[ManifestRow]:
    """CSV with subject_id, drive_id, clip_id, scenario; optional label
    (default normal) and file (default <clip_id>.mp4)."""
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise ManifestError(f"cannot open manifest {path}: {exc}") from exc
    with fh:
        reader = csv.DictReader(fh)
        cols = reader.fieldnames or []
        missing = [c for c in REQUIRED_COLUMNS if c not in cols]
        if missing:
            raise ManifestError(f"{path}: missing columns {missing}")
        rows = []
        seen = set()
        for lineno, rec in enumerate(reader, start=2):
            label = (rec.get("label") or "normal").strip()
            if label not in LABELS:
                raise ManifestError(f"{path}:{lineno}: bad label {label!r}")
            row = ManifestRow(
                subject=rec["subject_id"],
                drive=rec["drive_id"],
                clip=rec["clip_id"],
                scenario=rec["scenario"],
                label=label,
                filename=(rec.get("file") or f"{rec['clip_id']}.mp4").strip(),
            )
            key = (row.subject, row.drive, row.clip)
            if key in seen:
                raise ManifestError(f"{path}:{lineno}: duplicate clip {key}")
            seen.add(key)
            rows.append(row)
    return rows


def extract(manifest_path, videos_dir, out_path, cfg: BridgeConfig) -> dict:
    """Embed every manifest clip; undecodable clips land in
    ``<out>.rejects.csv`` instead of the embedding file."""
    rows = load_manifest(manifest_path)
    encoder = FrameEncoder(cfg)

    vectors, entries, rejects = [], [], []
    for row in rows:
        video = os.path.join(videos_dir, row.filename)
        try:
            if not os.path.exists(video):
                raise DecodeError(row.clip, f"video file not found: {video}")
            frames = sample_frames(video, cfg.frame_rate, row.clip)
            vectors.append(encoder.encode_clip(frames))
        except DecodeError as exc:
            rejects.append((row.clip, exc.reason))
            continue
        entries.append(
            {
                "subject": row.subject,
                "drive": row.drive,
                "clip": row.clip,
                "scenario": row.scenario,
                "label": row.label,
            }
        )

    matrix = (
        np.stack(vectors).astype(np.float32)
        if vectors
        else np.empty((0, cfg.dim), dtype=np.float32)
    )
    write_sbem(matrix, entries, out_path)
    write_meta(
        {
            "model": cfg.model,
            "weights": cfg.weights_id,
            "recipe": RECIPE,
            "frame_rate": cfg.frame_rate,
            "resize": list(cfg.resize),
            "dim": cfg.dim,
            "clips": len(entries),
            "rejects": len(rejects),
        },
        out_path,
    )
    with open(str(out_path) + ".rejects.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["clip_id", "reason"])
        w.writerows(rejects)
    return {"embedded": len(entries), "rejected": len(rejects)}
