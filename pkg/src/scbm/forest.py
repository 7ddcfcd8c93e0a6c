"""Random forest built from scratch (Gini splits, bootstrap sampling) plus
standard binary classification metrics.

Labels are 0 (normal) / 1 (AD-aging). All randomness derives from
(seed, tree index) so retraining is bit-reproducible and trees could be
built in parallel without changing the result.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DimMismatch, LengthMismatch, SingleClass, TooFewRows


@dataclass(frozen=True)
class RfConfig:
    n_trees: int = 100
    max_features: Optional[int] = None  # default ceil(sqrt(n_features))
    max_depth: Optional[int] = None
    min_leaf: int = 1
    seed: int = 0


def _gini_best_split(x: np.ndarray, y: np.ndarray, min_leaf: int):
    """Best threshold for one feature, or None.

    Returns (weighted_gini, threshold). Thresholds sit at midpoints between
    consecutive distinct sorted values.
    """
    order = np.argsort(x, kind="stable")
    xs = x[order]
    ys = y[order]
    n = xs.shape[0]
    if xs[0] == xs[-1]:
        return None

    left_n = np.arange(1, n)
    left_c1 = np.cumsum(ys)[:-1]
    left_c0 = left_n - left_c1
    right_n = n - left_n
    total_c1 = int(ys.sum())
    right_c1 = total_c1 - left_c1
    right_c0 = right_n - right_c1

    valid = xs[1:] != xs[:-1]
    if min_leaf > 1:
        valid &= (left_n >= min_leaf) & (right_n >= min_leaf)
    if not valid.any():
        return None

    with np.errstate(invalid="ignore"):
        gini_l = 1.0 - (left_c0 / left_n) ** 2 - (left_c1 / left_n) ** 2
        gini_r = 1.0 - (right_c0 / right_n) ** 2 - (right_c1 / right_n) ** 2
    weighted = (left_n * gini_l + right_n * gini_r) / n
    weighted[~valid] = np.inf
    i = int(np.argmin(weighted))
    threshold = 0.5 * (float(xs[i]) + float(xs[i + 1]))
    return float(weighted[i]), threshold


def _node_gini(y: np.ndarray) -> float:
    n = y.shape[0]
    p1 = y.sum() / n
    return 1.0 - p1**2 - (1.0 - p1) ** 2


def _build_tree(X: np.ndarray, y: np.ndarray, cfg: RfConfig, rng: np.random.Generator):
    n_features = X.shape[1]
    k = cfg.max_features or math.ceil(math.sqrt(n_features))
    k = min(k, n_features)

    def make_leaf(idx):
        c1 = int(y[idx].sum())
        c0 = idx.shape[0] - c1
        return {"counts": [c0, c1], "class": 1 if c1 > c0 else 0}

    root: dict = {}
    # iterative build; stack entries are (node dict to fill, row indices, depth)
    stack = [(root, np.arange(X.shape[0]), 0)]
    while stack:
        node, idx, depth = stack.pop()
        yn = y[idx]
        n = idx.shape[0]
        pure = yn[0] == yn[-1] and (yn == yn[0]).all()
        depth_capped = cfg.max_depth is not None and depth >= cfg.max_depth
        if pure or n < 2 * cfg.min_leaf or depth_capped:
            node.update(make_leaf(idx))
            continue

        features = rng.choice(n_features, size=k, replace=False)
        parent = _node_gini(yn)
        best = None
        for f in features:
            res = _gini_best_split(X[idx, f], yn, cfg.min_leaf)
            if res is None:
                continue
            weighted, threshold = res
            if weighted < parent - 1e-12 and (best is None or weighted < best[0]):
                best = (weighted, int(f), threshold)
        if best is None:
            node.update(make_leaf(idx))
            continue

        _, f, threshold = best
        mask = X[idx, f] <= threshold
        left_idx = idx[mask]
        right_idx = idx[~mask]
        node["feature"] = f
        node["threshold"] = threshold
        node["left"] = {}
        node["right"] = {}
        stack.append((node["right"], right_idx, depth + 1))
        stack.append((node["left"], left_idx, depth + 1))
    return root


def _tree_predict(node: dict, X: np.ndarray) -> np.ndarray:
    out = np.empty(X.shape[0], dtype=np.int64)
    stack = [(node, np.arange(X.shape[0]))]
    while stack:
        nd, idx = stack.pop()
        if idx.size == 0:
            continue
        if "class" in nd:
            out[idx] = nd["class"]
            continue
        mask = X[idx, nd["feature"]] <= nd["threshold"]
        stack.append((nd["left"], idx[mask]))
        stack.append((nd["right"], idx[~mask]))
    return out


@dataclass
class RandomForestModel:
    trees: list
    n_features: int
    config: RfConfig

    def to_json(self) -> str:
        return json.dumps(
            {
                "n_features": self.n_features,
                "config": {
                    "n_trees": self.config.n_trees,
                    "max_features": self.config.max_features,
                    "max_depth": self.config.max_depth,
                    "min_leaf": self.config.min_leaf,
                    "seed": self.config.seed,
                },
                "trees": self.trees,
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "RandomForestModel":
        obj = json.loads(text)
        return cls(
            trees=obj["trees"],
            n_features=obj["n_features"],
            config=RfConfig(**obj["config"]),
        )


def rf_train(X: np.ndarray, y: np.ndarray, config: RfConfig = RfConfig()) -> RandomForestModel:
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if X.shape[0] < 2:
        raise TooFewRows(f"need at least 2 rows, got {X.shape[0]}")
    if X.shape[0] != y.shape[0]:
        raise LengthMismatch(f"{X.shape[0]} rows but {y.shape[0]} labels")
    if len(np.unique(y)) < 2:
        raise SingleClass("training data contains a single class")

    trees = []
    n = X.shape[0]
    for i in range(config.n_trees):
        rng = np.random.default_rng([config.seed, i])
        boot = rng.integers(0, n, size=n)
        trees.append(_build_tree(X[boot], y[boot], config, rng))
    return RandomForestModel(trees=trees, n_features=X.shape[1], config=config)


def rf_predict_proba(model: RandomForestModel, X: np.ndarray) -> np.ndarray:
    """Fraction of trees voting AD-aging, per row."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.n_features:
        raise DimMismatch(f"expected {model.n_features} features, got shape {X.shape}")
    votes = np.zeros(X.shape[0], dtype=np.int64)
    for tree in model.trees:
        votes += _tree_predict(tree, X)
    return votes / len(model.trees)


def rf_predict(model: RandomForestModel, X: np.ndarray) -> np.ndarray:
    """Majority vote; an exact tie resolves to normal (0)."""
    return (rf_predict_proba(model, X) > 0.5).astype(np.int64)


@dataclass(frozen=True)
class MetricsReport:
    tp: int
    fp: int
    fn: int
    tn: int
    undefined_precision: bool = False
    undefined_recall: bool = False

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    @property
    def accuracy(self) -> float:
        return (self.tp + self.tn) / self.total

    @property
    def precision(self) -> float:
        d = self.tp + self.fp
        return self.tp / d if d else 0.0

    @property
    def recall(self) -> float:
        d = self.tp + self.fn
        return self.tp / d if d else 0.0

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if (p + r) else 0.0


def compute_metrics(y_true, y_pred) -> MetricsReport:
    """Confusion counts and derived metrics; positive class is AD-aging (1).

    Ratios with zero denominator are reported as 0 and flagged.
    """
    y_true = np.asarray(y_true, dtype=np.int64)
    y_pred = np.asarray(y_pred, dtype=np.int64)
    if y_true.shape != y_pred.shape or y_true.size == 0:
        raise LengthMismatch(
            f"label vectors must be nonempty and equal length: {y_true.shape} vs {y_pred.shape}"
        )
    tp = int(np.sum((y_true == 1) & (y_pred == 1)))
    fp = int(np.sum((y_true == 0) & (y_pred == 1)))
    fn = int(np.sum((y_true == 1) & (y_pred == 0)))
    tn = int(np.sum((y_true == 0) & (y_pred == 0)))
    return MetricsReport(
        tp=tp,
        fp=fp,
        fn=fn,
        tn=tn,
        undefined_precision=(tp + fp) == 0,
        undefined_recall=(tp + fn) == 0,
    )
