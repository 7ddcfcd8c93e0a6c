"""Per-scenario inter-group distances and discriminative-scenario selection."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from enum import Enum
from typing import Mapping

import numpy as np

from .core import EmbeddingMatrix
from .errors import DimMismatch, EmptyClass


class DistanceMetric(Enum):
    CENTROID = "centroid"
    AVG_PAIRWISE_L2 = "avg_l2"


class DistanceSpace(Enum):
    REDUCED = "reduced"
    FULL = "full"


def _check_sets(A: np.ndarray, B: np.ndarray):
    A = np.atleast_2d(np.asarray(A, dtype=np.float64))
    B = np.atleast_2d(np.asarray(B, dtype=np.float64))
    if A.shape[0] == 0 or B.shape[0] == 0:
        raise EmptyClass("both vector sets must be nonempty")
    if A.shape[1] != B.shape[1]:
        raise DimMismatch(f"dims differ: {A.shape[1]} vs {B.shape[1]}")
    return A, B


def centroid_distance(A, B) -> float:
    """Euclidean distance between the two class means."""
    A, B = _check_sets(A, B)
    return float(np.linalg.norm(A.mean(axis=0) - B.mean(axis=0)))


def avg_pairwise_l2(A, B) -> float:
    """Mean Euclidean distance over all cross pairs."""
    A, B = _check_sets(A, B)
    diffs = A[:, None, :] - B[None, :, :]
    return float(np.sqrt((diffs**2).sum(axis=2)).mean())


_METRIC_FN = {
    DistanceMetric.CENTROID: centroid_distance,
    DistanceMetric.AVG_PAIRWISE_L2: avg_pairwise_l2,
}


@dataclass(frozen=True)
class RankingEntry:
    scenario: str
    dist_avg: float
    metric: DistanceMetric
    space: DistanceSpace


@dataclass(frozen=True)
class ScenarioRanking:
    entries: tuple[RankingEntry, ...]  # sorted: distance desc, scenario asc on ties

    @property
    def best(self) -> str:
        return self.entries[0].scenario

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["scenario", "metric", "space", "dist_avg", "rank"])
            for rank, e in enumerate(self.entries, start=1):
                w.writerow([e.scenario, e.metric.value, e.space.value, repr(e.dist_avg), rank])


def rank_scenarios(
    per_scenario: Mapping[str, EmbeddingMatrix],
    metric: DistanceMetric = DistanceMetric.CENTROID,
    space: DistanceSpace = DistanceSpace.REDUCED,
) -> ScenarioRanking:
    """Inter-group distance between the normal and AD-aging rows of each
    scenario; the first entry is the most discriminative scenario."""
    fn = _METRIC_FN[metric]
    entries = []
    for scenario, matrix in per_scenario.items():
        y = matrix.labels()
        X = matrix.vectors
        A = X[y == 0]
        B = X[y == 1]
        if A.shape[0] == 0 or B.shape[0] == 0:
            missing = "normal" if A.shape[0] == 0 else "ad_aging"
            raise EmptyClass(f"scenario {scenario!r} has no {missing} vectors")
        entries.append(RankingEntry(scenario, fn(A, B), metric, space))
    entries.sort(key=lambda e: (-e.dist_avg, e.scenario))
    return ScenarioRanking(tuple(entries))
