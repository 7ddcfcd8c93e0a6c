"""Flat key=value pipeline configuration.

Unknown keys are errors; every value is validated against the constraints
of the stage that consumes it. ``seed`` is the one required key.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .errors import ConfigError
from .ranking import DistanceMetric, DistanceSpace


@dataclass(frozen=True)
class PipelineConfig:
    seed: int
    m: int = 6144
    n: int = 50
    frame_rate: int = 10
    metric: DistanceMetric = DistanceMetric.CENTROID
    space: DistanceSpace = DistanceSpace.REDUCED
    classifier_space: DistanceSpace = DistanceSpace.FULL
    rf_trees: int = 100
    rf_max_features: Optional[int] = None  # None -> ceil(sqrt(dim))
    rf_max_depth: Optional[int] = None
    rf_min_leaf: int = 1
    k: int = 5
    r: int = 3
    test_fraction: float = 0.2
    resamples: int = 10
    min_fraction: float = 0.0
    cohort: str = "default"  # synth preset: default | demo

    def __post_init__(self):
        checks = [
            (self.m > 0, "m", "must be positive"),
            (self.n in (50, 100, 200), "n", "must be one of 50, 100, 200"),
            (self.frame_rate in (1, 10), "frame_rate", "must be 1 or 10"),
            (self.rf_trees >= 1, "rf_trees", "must be >= 1"),
            (self.rf_min_leaf >= 1, "rf_min_leaf", "must be >= 1"),
            (self.k >= 1, "k", "must be >= 1"),
            (self.r >= 1, "r", "must be >= 1"),
            (0 < self.test_fraction < 1, "test_fraction", "must be in (0, 1)"),
            (self.resamples >= 1, "resamples", "must be >= 1"),
            (0 <= self.min_fraction <= 1, "min_fraction", "must be in [0, 1]"),
            (self.cohort in ("default", "demo"), "cohort", "must be default or demo"),
            (self.n < self.m, "n", "must be smaller than m"),
        ]
        for ok, name, reason in checks:
            if not ok:
                raise ConfigError(f"config field {name}: {reason}")


_INT_FIELDS = {"seed", "m", "n", "frame_rate", "rf_trees", "rf_min_leaf", "k", "r", "resamples"}
_OPT_INT_FIELDS = {"rf_max_features", "rf_max_depth"}
_FLOAT_FIELDS = {"test_fraction", "min_fraction"}
_STR_FIELDS = {"cohort"}


def parse_config(path) -> PipelineConfig:
    values: dict = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
            key, _, raw = line.partition("=")
            key = key.strip()
            raw = raw.strip()
            if key in values:
                raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
            values[key] = (lineno, raw)

    kwargs: dict = {}
    for key, (lineno, raw) in values.items():
        try:
            if key in _INT_FIELDS:
                kwargs[key] = int(raw)
            elif key in _OPT_INT_FIELDS:
                kwargs[key] = None if raw.lower() == "none" else int(raw)
            elif key in _FLOAT_FIELDS:
                kwargs[key] = float(raw)
            elif key in _STR_FIELDS:
                kwargs[key] = raw
            elif key == "metric":
                kwargs[key] = DistanceMetric(raw)
            elif key in ("space", "classifier_space"):
                kwargs[key] = DistanceSpace(raw)
            else:
                raise ConfigError(f"{path}:{lineno}: unknown config key {key!r}")
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: field {key}: bad value {raw!r} ({exc})")
    if "seed" not in kwargs:
        raise ConfigError(f"{path}: missing required config field seed")
    return PipelineConfig(**kwargs)


def write_default_config(path, seed: int = 0) -> None:
    cfg = PipelineConfig(seed=seed)
    lines = [
        f"seed = {cfg.seed}",
        f"m = {cfg.m}",
        f"n = {cfg.n}",
        f"frame_rate = {cfg.frame_rate}",
        f"metric = {cfg.metric.value}",
        f"space = {cfg.space.value}",
        f"classifier_space = {cfg.classifier_space.value}",
        f"rf_trees = {cfg.rf_trees}",
        "rf_max_features = none",
        "rf_max_depth = none",
        f"rf_min_leaf = {cfg.rf_min_leaf}",
        f"k = {cfg.k}",
        f"r = {cfg.r}",
        f"test_fraction = {cfg.test_fraction}",
        f"resamples = {cfg.resamples}",
        f"min_fraction = {cfg.min_fraction}",
        f"cohort = {cfg.cohort}",
    ]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
