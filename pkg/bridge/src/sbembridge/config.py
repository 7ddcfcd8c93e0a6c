from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .errors import BridgeError

#: Per-frame feature recipe; written verbatim into the run metadata so a
#: produced file always carries its own provenance.
RECIPE = (
    "resnet50 final-stage features (2048ch), spatial mean+max+std concat "
    "-> 6144 per frame; mean over frames per clip"
)


@dataclass(frozen=True)
class BridgeConfig:
    model: str = "resnet50"
    frame_rate: int = 10            # frames sampled per second of footage
    resize: tuple = (960, 752)      # (width, height) fed to the encoder
    dim: int = 6144
    weights: Optional[str] = None   # checkpoint path; None -> seeded init
    seed: int = 0                   # init seed when no checkpoint is given

    def __post_init__(self):
        if self.frame_rate not in (1, 10):
            raise BridgeError(f"frame_rate must be 1 or 10, got {self.frame_rate}")
        if self.model != "resnet50":
            raise BridgeError(f"unsupported model {self.model!r}")
        if self.dim != 6144:
            raise BridgeError(f"dim is fixed at 6144, got {self.dim}")

    @property
    def weights_id(self) -> str:
        return self.weights if self.weights else f"seeded-random:seed={self.seed}"
