"""Frozen vision encoder producing one 6144-dim feature per frame.

Per frame: resize, normalize, run the convolutional trunk of a ResNet-50,
then pool the final 2048-channel feature map three ways over space
(mean, max, std) and concatenate. A clip's vector is the mean over its
frames, so frame order never matters.
"""

from __future__ import annotations

import cv2
import numpy as np
import torch

from .config import BridgeConfig

_IMAGENET_MEAN = (0.485, 0.456, 0.406)
_IMAGENET_STD = (0.229, 0.224, 0.225)


class FrameEncoder:
    def __init__(self, cfg: BridgeConfig):
        from torchvision.models import resnet50

        self.cfg = cfg
        torch.manual_seed(cfg.seed)
        model = resnet50(weights=None)
        if cfg.weights:
            state = torch.load(cfg.weights, map_location="cpu")
            model.load_state_dict(state)
        # drop the avgpool/fc head; keep the trunk up to the final stage
        self.trunk = torch.nn.Sequential(*list(model.children())[:-2])
        self.trunk.eval()
        for p in self.trunk.parameters():
            p.requires_grad_(False)

    def _preprocess(self, frames_rgb) -> torch.Tensor:
        w, h = self.cfg.resize
        batch = np.stack(
            [cv2.resize(f, (w, h), interpolation=cv2.INTER_AREA) for f in frames_rgb]
        ).astype(np.float32) / 255.0
        batch = (batch - _IMAGENET_MEAN) / _IMAGENET_STD
        return torch.from_numpy(batch.astype(np.float32)).permute(0, 3, 1, 2)

    @torch.no_grad()
    def encode_frames(self, frames_rgb) -> np.ndarray:
        """(n_frames, 6144) float32 feature matrix."""
        x = self._preprocess(frames_rgb)
        fmap = self.trunk(x)  # (n, 2048, H', W')
        flat = fmap.flatten(2)
        feats = torch.cat(
            [flat.mean(dim=2), flat.amax(dim=2), flat.std(dim=2, unbiased=False)],
            dim=1,
        )
        return feats.numpy().astype(np.float32)

    @torch.no_grad()
    def encode_clip(self, frames_rgb) -> np.ndarray:
        """(6144,) float32 clip vector: mean of the per-frame features."""
        feats = self.encode_frames(frames_rgb)
        return feats.mean(axis=0, dtype=np.float64).astype(np.float32)
