"""Deterministic frame sampling from video files."""

from __future__ import annotations

import math

import cv2
import numpy as np

from .errors import DecodeError


def sample_frames(path, rate: int, clip: str) -> list[np.ndarray]:
    """ceil(duration * rate) frames, evenly spaced, as RGB uint8 arrays.

    Frames are decoded sequentially (no seeking) so the result does not
    depend on codec keyframe placement.
    """
    cap = cv2.VideoCapture(str(path))
    try:
        if not cap.isOpened():
            raise DecodeError(clip, f"cannot open {path}")
        fps = cap.get(cv2.CAP_PROP_FPS)
        n_frames = int(cap.get(cv2.CAP_PROP_FRAME_COUNT))
        if fps <= 0 or n_frames <= 0:
            raise DecodeError(clip, f"no decodable frames in {path}")
        duration = n_frames / fps
        count = math.ceil(duration * rate)
        wanted = sorted({min(n_frames - 1, i * n_frames // count) for i in range(count)})

        frames = []
        for idx in range(wanted[-1] + 1):
            ok, frame = cap.read()
            if not ok:
                raise DecodeError(clip, f"frame {idx} of {path} failed to decode")
            if idx in wanted:
                frames.append(cv2.cvtColor(frame, cv2.COLOR_BGR2RGB))
        # duplicates collapse when count > n_frames; repeat to honor the count
        if len(frames) < count:
            by_idx = dict(zip(wanted, frames))
            frames = [
                by_idx[min(n_frames - 1, i * n_frames // count)] for i in range(count)
            ]
        return frames
    finally:
        cap.release()
