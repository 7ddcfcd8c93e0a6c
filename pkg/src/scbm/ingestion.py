"""CSV loaders with referential-integrity checks, clip accounting and
exposure statistics.

All tabular inputs are UTF-8 CSV with a required header. Parsing is total:
any malformed row raises a positioned ParseError and nothing is returned.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence

from .core import (
    ClipRecord,
    ClipStatus,
    CognitiveLabel,
    NeuropsychBattery,
    RouteSegment,
    Subject,
    TripRecord,
)
from .errors import (
    InvariantError,
    ParseError,
    UnknownScenario,
    UnknownSegment,
    UnknownSubject,
)

SEGMENT_HEADER = ["segment_id", "scenario", "length_m", "speed_limit_mph", "functional_class"]
TRIP_HEADER = ["subject_id", "drive_id", "segment_id", "timestamp"]
CLIP_HEADER = ["subject_id", "drive_id", "clip_id", "segment_id", "status", "duration_min", "timestamp"]
SUBJECT_HEADER = ["subject_id", "label", "cogstat", "moca", "C", "L", "R", "B", "R_cs", "R_rs", "T"]

DEFAULT_VALID_STATUSES = frozenset({ClipStatus.PURE, ClipStatus.BLACKFRAME})

_LABELS = {
    "normal": CognitiveLabel.NORMAL,
    "mci": CognitiveLabel.MCI,
    "ad": CognitiveLabel.AD,
}


def _read_rows(path, expected_header):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(path, 1, "empty file, header required")
        if header != expected_header:
            raise ParseError(path, 1, f"bad header {header}, expected {expected_header}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(expected_header):
                raise ParseError(path, lineno, f"expected {len(expected_header)} fields, got {len(row)}")
            yield lineno, row


def _parse_float(path, lineno, name, value) -> float:
    try:
        return float(value)
    except ValueError:
        raise ParseError(path, lineno, f"field {name}: not a number: {value!r}")


def load_segments(path) -> dict[str, RouteSegment]:
    """Load the route-segment database keyed by segment id."""
    segments: dict[str, RouteSegment] = {}
    for lineno, row in _read_rows(path, SEGMENT_HEADER):
        seg_id, scenario, length_m, speed, fclass = row
        if seg_id in segments:
            raise ParseError(path, lineno, f"duplicate segment_id {seg_id!r}")
        try:
            seg = RouteSegment(
                id=seg_id,
                scenario=scenario,
                length_m=_parse_float(path, lineno, "length_m", length_m),
                speed_limit_mph=_parse_float(path, lineno, "speed_limit_mph", speed),
                functional_class=fclass,
            )
        except InvariantError as exc:
            raise InvariantError(f"{path}:{lineno}: {exc}") from exc
        segments[seg_id] = seg
    return segments


def load_subjects(path) -> dict[str, Subject]:
    subjects: dict[str, Subject] = {}
    for lineno, row in _read_rows(path, SUBJECT_HEADER):
        sid, label, cogstat, moca = row[0], row[1], row[2], row[3]
        battery_cols = row[4:]
        if sid in subjects:
            raise ParseError(path, lineno, f"duplicate subject_id {sid!r}")
        if label not in _LABELS:
            raise ParseError(path, lineno, f"unknown label {label!r}")
        battery = None
        if any(c.strip() for c in battery_cols):
            if not all(c.strip() for c in battery_cols):
                raise ParseError(path, lineno, "battery columns must be all present or all blank")
            vals = [_parse_float(path, lineno, n, c) for n, c in zip(SUBJECT_HEADER[4:], battery_cols)]
            battery = NeuropsychBattery(*vals)
        subjects[sid] = Subject(
            id=sid,
            label=_LABELS[label],
            battery=battery,
            cogstat=_parse_float(path, lineno, "cogstat", cogstat) if cogstat.strip() else None,
            moca=_parse_float(path, lineno, "moca", moca) if moca.strip() else None,
        )
    return subjects


def load_trips(
    path,
    segments: Mapping[str, RouteSegment],
    subjects: Optional[Mapping[str, Subject]] = None,
) -> list[TripRecord]:
    trips = []
    for lineno, row in _read_rows(path, TRIP_HEADER):
        sid, drive, seg_id, ts = row
        if seg_id not in segments:
            raise UnknownSegment(f"{path}:{lineno}: unknown segment {seg_id!r}")
        if subjects is not None and sid not in subjects:
            raise UnknownSubject(f"{path}:{lineno}: unknown subject {sid!r}")
        trips.append(TripRecord(subject=sid, drive=drive, segment=seg_id, timestamp=ts))
    return trips


def load_clips(
    path,
    segments: Mapping[str, RouteSegment],
    subjects: Optional[Mapping[str, Subject]] = None,
) -> list[ClipRecord]:
    """Load the clip manifest; clip scenario comes from its segment."""
    clips = []
    seen: set[tuple[str, str, str]] = set()
    for lineno, row in _read_rows(path, CLIP_HEADER):
        sid, drive, clip_id, seg_id, status, duration, ts = row
        if seg_id not in segments:
            raise UnknownSegment(f"{path}:{lineno}: unknown segment {seg_id!r}")
        if subjects is not None and sid not in subjects:
            raise UnknownSubject(f"{path}:{lineno}: unknown subject {sid!r}")
        try:
            st = ClipStatus(status)
        except ValueError:
            raise ParseError(path, lineno, f"unknown status {status!r}")
        key = (sid, drive, clip_id)
        if key in seen:
            raise ParseError(path, lineno, f"duplicate clip key {key}")
        seen.add(key)
        clips.append(
            ClipRecord(
                subject=sid,
                drive=drive,
                clip=clip_id,
                segment=seg_id,
                scenario=segments[seg_id].scenario,
                status=st,
                duration_min=_parse_float(path, lineno, "duration_min", duration),
                timestamp=ts,
            )
        )
    return clips


@dataclass(frozen=True)
class DurationBreakdown:
    total_min: float
    pure_min: float
    blackframe_min: float
    missing_min: float

    def _frac(self, part: float) -> float:
        return part / self.total_min if self.total_min > 0 else 0.0

    @property
    def pure_fraction(self) -> float:
        return self._frac(self.pure_min)

    @property
    def blackframe_fraction(self) -> float:
        return self._frac(self.blackframe_min)

    @property
    def missing_fraction(self) -> float:
        return self._frac(self.missing_min)

    @property
    def valid_min(self) -> float:
        """Footage retained downstream: pure plus blackframe."""
        return self.pure_min + self.blackframe_min


def duration_breakdown(clips: Iterable[ClipRecord]) -> DurationBreakdown:
    sums = {s: 0.0 for s in ClipStatus}
    for c in clips:
        sums[c.status] += c.duration_min
    total = sum(sums.values())
    return DurationBreakdown(
        total_min=total,
        pure_min=sums[ClipStatus.PURE],
        blackframe_min=sums[ClipStatus.BLACKFRAME],
        missing_min=sums[ClipStatus.MISSING],
    )


def filter_scenario_samples(
    clips: Sequence[ClipRecord],
    scenario: str,
    include_statuses: frozenset = DEFAULT_VALID_STATUSES,
    scenarios: Optional[Iterable[str]] = None,
) -> list[ClipRecord]:
    """Clips of one scenario with an allowed status, in stable input order.

    ``scenarios`` is the known scenario universe (e.g. from the segment
    database); when omitted it is derived from the clips themselves.
    """
    known = set(scenarios) if scenarios is not None else {c.scenario for c in clips}
    if scenario not in known:
        raise UnknownScenario(f"unknown scenario {scenario!r}")
    return [c for c in clips if c.scenario == scenario and c.status in include_statuses]


@dataclass(frozen=True)
class ExposureStats:
    scenario: str
    n_u: int       # unique trips, normal group
    m_u: int       # unique trips, MCI group
    a_u: int       # unique trips, AD group
    t_bar_u: int   # all trips including repeats
    n_subjects: int

    def __post_init__(self):
        if self.t_bar_u < self.t_u:
            raise InvariantError(
                f"{self.scenario}: total trips {self.t_bar_u} < unique trips {self.t_u}"
            )

    @property
    def t_u(self) -> int:
        return self.n_u + self.m_u + self.a_u

    @property
    def t_avg(self) -> float:
        """Average trips per subject with at least one trip in the scenario."""
        return self.t_bar_u / self.n_subjects if self.n_subjects else 0.0


def exposure_stats(
    trips: Iterable[TripRecord],
    subjects: Mapping[str, Subject],
    segments: Mapping[str, RouteSegment],
) -> dict[str, ExposureStats]:
    """Per-scenario trip exposure. A unique trip is a distinct
    (subject, segment) pair; repeats only increment the all-trips total."""
    unique: dict[str, set[tuple[str, str]]] = {}
    totals: dict[str, int] = {}
    scen_subjects: dict[str, set[str]] = {}
    for t in trips:
        if t.subject not in subjects:
            raise UnknownSubject(f"trip references unknown subject {t.subject!r}")
        scenario = segments[t.segment].scenario
        unique.setdefault(scenario, set()).add((t.subject, t.segment))
        totals[scenario] = totals.get(scenario, 0) + 1
        scen_subjects.setdefault(scenario, set()).add(t.subject)

    out = {}
    for scenario, pairs in unique.items():
        counts = {CognitiveLabel.NORMAL: 0, CognitiveLabel.MCI: 0, CognitiveLabel.AD: 0}
        for sid, _seg in pairs:
            counts[subjects[sid].label] += 1
        out[scenario] = ExposureStats(
            scenario=scenario,
            n_u=counts[CognitiveLabel.NORMAL],
            m_u=counts[CognitiveLabel.MCI],
            a_u=counts[CognitiveLabel.AD],
            t_bar_u=totals[scenario],
            n_subjects=len(scen_subjects[scenario]),
        )
    return out


def coverage_gate(
    subjects: Mapping[str, Subject],
    trips: Iterable[TripRecord],
    min_fraction: float,
    segments: Mapping[str, RouteSegment],
) -> set[str]:
    """Subjects whose distinct driven segments cover at least min_fraction
    of the segment database."""
    if not (0 <= min_fraction <= 1):
        raise InvariantError(f"min_fraction must be in [0, 1], got {min_fraction}")
    driven: dict[str, set[str]] = {sid: set() for sid in subjects}
    for t in trips:
        if t.subject in driven:
            driven[t.subject].add(t.segment)
    total = len(segments)
    if total == 0:
        return set(subjects)
    return {sid for sid, segs in driven.items() if len(segs) / total >= min_fraction}
