"""Shared domain types: subjects, labels, route segments, clips, embedding matrices.

All types are immutable after construction and validate their invariants in
``__post_init__`` so a constructed value is always well-formed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from .errors import DimMismatch, InvariantError


class CognitiveLabel(Enum):
    NORMAL = "normal"
    MCI = "mci"
    AD = "ad"


class BinaryLabel(Enum):
    NORMAL = "normal"
    AD_AGING = "ad_aging"


class ClipStatus(Enum):
    PURE = "pure"
    BLACKFRAME = "blackframe"
    MISSING = "missing"


def binary_label(label: CognitiveLabel) -> BinaryLabel:
    """Collapse the three-way label into the two-class view (MCI and AD merge)."""
    if label is CognitiveLabel.NORMAL:
        return BinaryLabel.NORMAL
    return BinaryLabel.AD_AGING


@dataclass(frozen=True)
class NeuropsychBattery:
    """Raw scores of the seven tests feeding the composite cognition score."""

    C: float    # word-association word count
    L: float    # line-orientation score
    R: float    # verbal-learning 30-min recall
    B: float    # visual-retention error count, >= 0
    R_cs: float  # complex-figure copy score
    R_rs: float  # complex-figure 30-min recall
    T: float    # trail-making B seconds, > 0

    def __post_init__(self):
        if self.B < 0:
            raise InvariantError(f"battery B must be >= 0, got {self.B}")
        if self.T <= 0:
            raise InvariantError(f"battery T must be > 0, got {self.T}")


@dataclass(frozen=True)
class Subject:
    id: str
    label: CognitiveLabel
    battery: Optional[NeuropsychBattery] = None
    cogstat: Optional[float] = None
    moca: Optional[float] = None

    def __post_init__(self):
        if not self.id:
            raise InvariantError("subject id must be non-empty")
        if self.moca is not None and not (0 <= self.moca <= 30):
            raise InvariantError(f"moca out of [0, 30]: {self.moca}")
        if self.battery is not None and self.cogstat is not None:
            from .cogscore import compute_cogstat

            expected = compute_cogstat(self.battery)
            if abs(expected - self.cogstat) > 1e-9:
                raise InvariantError(
                    f"subject {self.id}: cogstat {self.cogstat} does not match "
                    f"battery-derived value {expected}"
                )

    @property
    def binary(self) -> BinaryLabel:
        return binary_label(self.label)


@dataclass(frozen=True)
class RouteSegment:
    id: str
    scenario: str
    length_m: float
    speed_limit_mph: float
    functional_class: str

    def __post_init__(self):
        if not self.id:
            raise InvariantError("segment id must be non-empty")
        if not (0 < self.length_m <= 500):
            raise InvariantError(
                f"segment {self.id}: length_m must be in (0, 500], got {self.length_m}"
            )
        if self.speed_limit_mph <= 0:
            raise InvariantError(
                f"segment {self.id}: speed_limit_mph must be > 0, got {self.speed_limit_mph}"
            )


@dataclass(frozen=True)
class ClipRecord:
    subject: str
    drive: str
    clip: str
    segment: str
    scenario: str
    status: ClipStatus
    duration_min: float
    timestamp: str

    def __post_init__(self):
        if self.duration_min < 0:
            raise InvariantError(
                f"clip {self.clip}: duration_min must be >= 0, got {self.duration_min}"
            )


@dataclass(frozen=True)
class TripRecord:
    subject: str
    drive: str
    segment: str
    timestamp: str


@dataclass(frozen=True)
class ClipKey:
    subject: str
    drive: str
    clip: str
    scenario: str
    label: BinaryLabel


class EmbeddingMatrix:
    """Fixed-dimension embedding rows with a parallel clip-key index.

    Vectors are stored as a 2-D float array (float32 on the serialization
    path); keys are unique and row order is significant.
    """

    def __init__(self, keys: Sequence[ClipKey], vectors: np.ndarray):
        vectors = np.asarray(vectors)
        if vectors.ndim != 2:
            raise DimMismatch(f"vectors must be 2-D, got shape {vectors.shape}")
        if len(keys) != vectors.shape[0]:
            raise DimMismatch(
                f"{len(keys)} keys but {vectors.shape[0]} vector rows"
            )
        if vectors.size and not np.all(np.isfinite(vectors)):
            raise InvariantError("embedding vectors must be finite")
        if len(set(keys)) != len(keys):
            raise InvariantError("duplicate clip keys in embedding matrix")
        self.keys: tuple[ClipKey, ...] = tuple(keys)
        self.vectors = vectors
        self.vectors.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def __len__(self) -> int:
        return self.vectors.shape[0]

    def labels(self) -> np.ndarray:
        """Binary labels as 0 (normal) / 1 (AD-aging), one per row."""
        return np.array(
            [1 if k.label is BinaryLabel.AD_AGING else 0 for k in self.keys],
            dtype=np.int64,
        )

    def subjects(self) -> list[str]:
        return [k.subject for k in self.keys]

    def __eq__(self, other) -> bool:
        if not isinstance(other, EmbeddingMatrix):
            return NotImplemented
        return (
            self.keys == other.keys
            and self.vectors.dtype == other.vectors.dtype
            and self.vectors.shape == other.vectors.shape
            and np.array_equal(
                self.vectors.view(np.uint8), other.vectors.view(np.uint8)
            )
        )

    def __hash__(self):
        return hash(self.keys)
