import csv
import os

import cv2
import numpy as np
import pytest


def write_video(path, n_frames, fps, size=(64, 48)):
    """Deterministic synthetic clip: moving gradient, no randomness."""
    w, h = size
    writer = cv2.VideoWriter(str(path), cv2.VideoWriter_fourcc(*"mp4v"), fps, (w, h))
    assert writer.isOpened(), f"cannot open video writer for {path}"
    xs = np.linspace(0, 255, w, dtype=np.float64)
    ys = np.linspace(0, 255, h, dtype=np.float64)
    for i in range(n_frames):
        frame = np.zeros((h, w, 3), dtype=np.uint8)
        frame[:, :, 0] = ((xs[None, :] + 13 * i) % 256).astype(np.uint8)
        frame[:, :, 1] = ((ys[:, None] + 29 * i) % 256).astype(np.uint8)
        frame[:, :, 2] = (i * 11) % 256
        writer.write(frame)
    writer.release()


def write_manifest(path, rows):
    cols = ["subject_id", "drive_id", "clip_id", "scenario", "label", "file"]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=cols)
        w.writeheader()
        w.writerows(rows)


@pytest.fixture(scope="session")
def video_dir(tmp_path_factory):
    """One-second 10 fps clip plus a short low-fps clip and a garbage file."""
    d = tmp_path_factory.mktemp("videos")
    write_video(d / "c1.mp4", n_frames=10, fps=10)
    write_video(d / "short.mp4", n_frames=3, fps=2)
    (d / "broken.mp4").write_bytes(b"not a video at all")
    return d


@pytest.fixture(scope="session")
def manifest_one(tmp_path_factory, video_dir):
    path = tmp_path_factory.mktemp("man") / "clips.csv"
    write_manifest(path, [
        {"subject_id": "S001", "drive_id": "d1", "clip_id": "c1",
         "scenario": "fwy-interchange", "label": "ad_aging", "file": "c1.mp4"},
    ])
    return path


@pytest.fixture(scope="session")
def out_dir(tmp_path_factory):
    return tmp_path_factory.mktemp("out")
