"""Evaluation protocols: random clip splits, leave-k-drivers-out (DLS),
per-scenario metric aggregation, delta rows, and the per-subject
misclassification report.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from decimal import Decimal
from enum import Enum
from typing import Mapping, Optional, Sequence

import numpy as np

from .core import ClipKey, EmbeddingMatrix, Subject
from .errors import (
    EmptyTest,
    NotEnoughSubjects,
    ProtocolMismatch,
    TooFewClips,
)
from .forest import MetricsReport, RfConfig, compute_metrics, rf_predict, rf_train

METRIC_NAMES = ("a", "P", "R", "F1")


class Protocol(Enum):
    RANDOM = "random"
    DLS = "dls"


@dataclass(frozen=True)
class SplitPlan:
    protocol: Protocol
    train_idx: tuple
    test_idx: tuple
    run_index: int = 0
    test_subjects: frozenset = frozenset()

    def __post_init__(self):
        if set(self.train_idx) & set(self.test_idx):
            raise ValueError("train and test index sets overlap")


def make_random_split(n_clips: int, test_fraction: float, seed, run_index: int = 0) -> SplitPlan:
    """Uniform clip-level partition; test size = floor(fraction * n), min 1."""
    if not (0 < test_fraction < 1):
        raise ValueError(f"test_fraction must be in (0, 1), got {test_fraction}")
    if n_clips < 2:
        raise TooFewClips(f"need at least 2 clips, got {n_clips}")
    n_test = max(1, math.floor(test_fraction * n_clips))
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n_clips)
    return SplitPlan(
        protocol=Protocol.RANDOM,
        train_idx=tuple(int(i) for i in perm[n_test:]),
        test_idx=tuple(int(i) for i in perm[:n_test]),
        run_index=run_index,
    )


def make_random_splits(n_clips: int, test_fraction: float, seed: int, resamples: int) -> list[SplitPlan]:
    return [
        make_random_split(n_clips, test_fraction, [seed, run], run_index=run)
        for run in range(resamples)
    ]


def make_dls_splits(
    keys: Sequence[ClipKey], k: int, r: int, seed: int
) -> list[SplitPlan]:
    """Leave-k-drivers-out: each run holds out every clip of k subjects.

    Runs draw independently; an exact repeat of an earlier run's left-out
    set is re-drawn when the subject pool allows distinct choices.
    """
    subjects = sorted({key.subject for key in keys})
    if k < 1 or k >= len(subjects):
        raise NotEnoughSubjects(
            f"k must be in [1, {len(subjects) - 1}] for {len(subjects)} subjects, got {k}"
        )
    if r < 1:
        raise ValueError(f"r must be >= 1, got {r}")
    rng = np.random.default_rng(seed)
    n_choices = math.comb(len(subjects), k)
    plans = []
    seen: set[frozenset] = set()
    for run in range(r):
        for _ in range(1000):
            chosen = frozenset(rng.choice(subjects, size=k, replace=False).tolist())
            if chosen not in seen or len(seen) >= n_choices:
                break
        seen.add(chosen)
        test_idx = tuple(i for i, key in enumerate(keys) if key.subject in chosen)
        train_idx = tuple(i for i, key in enumerate(keys) if key.subject not in chosen)
        plans.append(
            SplitPlan(
                protocol=Protocol.DLS,
                train_idx=train_idx,
                test_idx=test_idx,
                run_index=run,
                test_subjects=chosen,
            )
        )
    return plans


@dataclass
class ScenarioResult:
    scenario: str
    protocol: Protocol
    per_run: list  # MetricsReport per plan, ordered by run index
    subject_counts: dict  # subject id -> [n_test, n_error] summed over runs

    def _values(self, name: str) -> np.ndarray:
        attr = {"a": "accuracy", "P": "precision", "R": "recall", "F1": "f1"}[name]
        return np.array([getattr(m, attr) for m in self.per_run])

    def mean(self, name: str) -> float:
        return float(self._values(name).mean())

    def std(self, name: str) -> float:
        v = self._values(name)
        return float(v.std(ddof=1)) if len(v) > 1 else 0.0

    @property
    def pooled_accuracy(self) -> float:
        correct = sum(m.tp + m.tn for m in self.per_run)
        total = sum(m.total for m in self.per_run)
        return correct / total


def evaluate_scenario(
    matrix: EmbeddingMatrix,
    plans: Sequence[SplitPlan],
    rf_config: RfConfig = RfConfig(),
    scenario: Optional[str] = None,
) -> ScenarioResult:
    """Train on each plan's train rows, score its test rows, aggregate."""
    if not plans:
        raise ValueError("at least one split plan required")
    protocols = {p.protocol for p in plans}
    if len(protocols) > 1:
        raise ProtocolMismatch("plans mix protocols")
    scenario = scenario or matrix.keys[0].scenario
    y = matrix.labels()
    X = np.asarray(matrix.vectors, dtype=np.float64)

    per_run = []
    subject_counts: dict[str, list[int]] = {}
    for plan in sorted(plans, key=lambda p: p.run_index):
        if not plan.test_idx:
            raise EmptyTest(f"plan {plan.run_index} has empty test set")
        tr = np.array(plan.train_idx, dtype=np.int64)
        te = np.array(plan.test_idx, dtype=np.int64)
        # per-plan seed so runs are independent yet reproducible
        cfg = RfConfig(
            n_trees=rf_config.n_trees,
            max_features=rf_config.max_features,
            max_depth=rf_config.max_depth,
            min_leaf=rf_config.min_leaf,
            seed=rf_config.seed * 100003 + plan.run_index,
        )
        model = rf_train(X[tr], y[tr], cfg)
        pred = rf_predict(model, X[te])
        per_run.append(compute_metrics(y[te], pred))
        for row, p_lab in zip(te, pred):
            sid = matrix.keys[int(row)].subject
            cnt = subject_counts.setdefault(sid, [0, 0])
            cnt[0] += 1
            if p_lab != y[int(row)]:
                cnt[1] += 1
    return ScenarioResult(
        scenario=scenario,
        protocol=plans[0].protocol,
        per_run=per_run,
        subject_counts=subject_counts,
    )


def _decimal_sub(a: float, b: float) -> float:
    # Subtraction in decimal so two-decimal percentages difference
    # cleanly (71.03 - 55.12 -> 15.91, not 15.91000...004).
    return float(Decimal(repr(a)) - Decimal(repr(b)))


@dataclass(frozen=True)
class DeltaReport:
    scenario_a: str
    scenario_b: str
    protocol: Protocol
    deltas: Mapping[str, float]  # metric name -> mean(a) - mean(b)


def delta_report(result_a: ScenarioResult, result_b: ScenarioResult) -> DeltaReport:
    if result_a.protocol is not result_b.protocol:
        raise ProtocolMismatch(
            f"{result_a.protocol.value} vs {result_b.protocol.value}"
        )
    deltas = {
        name: _decimal_sub(result_a.mean(name), result_b.mean(name))
        for name in METRIC_NAMES
    }
    return DeltaReport(
        scenario_a=result_a.scenario,
        scenario_b=result_b.scenario,
        protocol=result_a.protocol,
        deltas=deltas,
    )


@dataclass(frozen=True)
class SubjectMissRow:
    subject_id: str
    label: str
    cogstat: Optional[float]
    moca: Optional[float]
    n_test: int
    n_error: int

    @property
    def percent(self) -> float:
        return 100.0 * self.n_error / self.n_test


@dataclass(frozen=True)
class SubjectMissReport:
    rows: tuple

    @property
    def pooled_accuracy(self) -> float:
        n_test = sum(r.n_test for r in self.rows)
        n_ok = sum(r.n_test - r.n_error for r in self.rows)
        return n_ok / n_test if n_test else 0.0


def subject_miss_report(
    results: Sequence[ScenarioResult], subjects: Mapping[str, Subject]
) -> SubjectMissReport:
    """Aggregate per-subject test appearances and errors across runs;
    subjects never tested are excluded."""
    if not results:
        raise ValueError("at least one evaluation result required")
    merged: dict[str, list[int]] = {}
    for res in results:
        for sid, (n_test, n_err) in res.subject_counts.items():
            cnt = merged.setdefault(sid, [0, 0])
            cnt[0] += n_test
            cnt[1] += n_err
    rows = []
    for sid in sorted(merged):
        n_test, n_err = merged[sid]
        if n_test == 0:
            continue
        subj = subjects.get(sid)
        rows.append(
            SubjectMissRow(
                subject_id=sid,
                label=subj.binary.value if subj else "",
                cogstat=subj.cogstat if subj else None,
                moca=subj.moca if subj else None,
                n_test=n_test,
                n_error=n_err,
            )
        )
    return SubjectMissReport(rows=tuple(rows))


def _fmt(x) -> str:
    return "" if x is None else repr(x)


def results_csv(results: Sequence[ScenarioResult], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["scenario", "protocol", "run", "a", "P", "R", "F1"])
        for res in results:
            for run, m in enumerate(res.per_run):
                w.writerow(
                    [res.scenario, res.protocol.value, run]
                    + [_fmt(v) for v in (m.accuracy, m.precision, m.recall, m.f1)]
                )
            w.writerow(
                [res.scenario, res.protocol.value, "mean"]
                + [_fmt(res.mean(n)) for n in METRIC_NAMES]
            )
            w.writerow(
                [res.scenario, res.protocol.value, "std"]
                + [_fmt(res.std(n)) for n in METRIC_NAMES]
            )


def delta_csv(delta: DeltaReport, delta_ds: DeltaReport, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["metric", "delta", "delta_ds"])
        for name in METRIC_NAMES:
            w.writerow([name, _fmt(delta.deltas[name]), _fmt(delta_ds.deltas[name])])


def subject_miss_csv(report: SubjectMissReport, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["subject_id", "label", "cogstat", "moca", "n_test", "n_error", "percent"])
        for r in report.rows:
            w.writerow(
                [r.subject_id, r.label, _fmt(r.cogstat), _fmt(r.moca), r.n_test, r.n_error, _fmt(r.percent)]
            )
