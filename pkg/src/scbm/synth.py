"""Synthetic cohort generator: subjects, segments, trips, clips and the
ground-truth ledger, calibrated to fixed exposure targets so the
ingestion path can be exercised without any private data.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .cogscore import compute_cogstat
from .core import CognitiveLabel, NeuropsychBattery, binary_label
from .embedding import SyntheticEmbedderSpec, planted_spec
from .errors import SpecInvalid

_GROUPS = (CognitiveLabel.NORMAL, CognitiveLabel.MCI, CognitiveLabel.AD)

# Clip status mix (fractions of clip count) mirroring the target
# footage breakdown.
_STATUS_P = {"pure": 0.726, "blackframe": 0.041, "missing": 0.233}

# Battery synthesis: group-level z offsets and per-test spread, chosen to
# give composite scores ordered normal > MCI > AD with overlap.
_BATTERY_Z = {
    CognitiveLabel.NORMAL: 0.1,
    CognitiveLabel.MCI: -0.1,
    CognitiveLabel.AD: -0.3,
}
_BATTERY_Z_SD = 0.6
_MOCA = {
    CognitiveLabel.NORMAL: (26.0, 2.0),
    CognitiveLabel.MCI: (20.0, 3.0),
    CognitiveLabel.AD: (12.0, 3.0),
}

_TERMS = (
    ("C", 38.7, 11.1),
    ("L", 26.2, 3.5),
    ("R", 10.08, 3.2),
    ("B", 4.4, 2.4),
    ("R_cs", 31.0, 3.7),
    ("R_rs", 15.7, 5.7),
    ("T", 46.1, 32.6),
)


@dataclass(frozen=True)
class ScenarioSpec:
    n_segments: int
    unique_trips: tuple  # (normal, mci, ad) distinct (subject, segment) targets
    total_trips: int     # all trips including repeats
    median_speed_mph: float
    median_length_m: float
    delta: float         # planted class separation for the synthetic embedder
    sigma: float = 1.0


@dataclass(frozen=True)
class CohortSpec:
    n_normal: int = 34
    n_mci: int = 26
    n_ad: int = 9
    scenarios: Mapping[str, ScenarioSpec] = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        counts = (self.n_normal, self.n_mci, self.n_ad)
        if any(c < 0 for c in counts):
            raise SpecInvalid(f"negative subject count in {counts}")
        if sum(counts) < 2 or self.n_normal == 0 or (self.n_mci + self.n_ad) == 0:
            raise SpecInvalid("cohort needs >= 2 subjects with both binary classes")
        group_sizes = dict(zip(_GROUPS, counts))
        for name, sc in self.scenarios.items():
            if sc.n_segments <= 0:
                raise SpecInvalid(f"{name}: n_segments must be positive")
            t_u = sum(sc.unique_trips)
            if sc.total_trips < t_u:
                raise SpecInvalid(f"{name}: total_trips {sc.total_trips} < unique {t_u}")
            for grp, target in zip(_GROUPS, sc.unique_trips):
                cap = group_sizes[grp] * sc.n_segments
                if target > cap:
                    raise SpecInvalid(
                        f"{name}: {target} unique trips infeasible for "
                        f"{group_sizes[grp]} {grp.value} subjects x {sc.n_segments} segments"
                    )

    def embedder_spec(self, dim: int) -> SyntheticEmbedderSpec:
        sigmas = {sc.sigma for sc in self.scenarios.values()}
        if len(sigmas) != 1:
            raise SpecInvalid("scenarios must share one sigma for the embedder spec")
        return planted_spec(
            dim,
            {name: sc.delta for name, sc in self.scenarios.items()},
            sigma=sigmas.pop(),
            seed=self.seed,
        )


def default_spec(seed: int = 0) -> CohortSpec:
    """Study-scale cohort: 69 subjects, two scenarios, fixed exposure
    targets, segment geometry spread around the scenario medians."""
    return CohortSpec(
        n_normal=34,
        n_mci=26,
        n_ad=9,
        scenarios={
            "fwy-interchange": ScenarioSpec(
                n_segments=632,
                unique_trips=(8136, 10134, 919),
                total_trips=68048,
                median_speed_mph=37.5,
                median_length_m=193.0,
                delta=4.0,
            ),
            "interstate": ScenarioSpec(
                n_segments=332,
                unique_trips=(7123, 7894, 780),
                total_trips=69620,
                median_speed_mph=60.0,
                median_length_m=322.0,
                delta=1.0,
            ),
        },
        seed=seed,
    )


def demo_spec(seed: int = 0, delta_fwy: float = 4.0, delta_int: float = 1.0) -> CohortSpec:
    """Desk-scale cohort for fast end-to-end runs."""
    return CohortSpec(
        n_normal=8,
        n_mci=5,
        n_ad=3,
        scenarios={
            "fwy-interchange": ScenarioSpec(
                n_segments=12,
                unique_trips=(48, 30, 18),
                total_trips=140,
                median_speed_mph=37.5,
                median_length_m=193.0,
                delta=delta_fwy,
            ),
            "interstate": ScenarioSpec(
                n_segments=8,
                unique_trips=(40, 24, 14),
                total_trips=110,
                median_speed_mph=60.0,
                median_length_m=322.0,
                delta=delta_int,
            ),
        },
        seed=seed,
    )


def _f(x: float) -> str:
    return repr(float(x))


def generate_cohort(spec: CohortSpec, out_dir) -> dict:
    """Write subjects/segments/trips/clips CSVs plus ledger.json; returns
    the ledger. Same spec (seed included) produces byte-identical files."""
    os.makedirs(out_dir, exist_ok=True)
    rng = np.random.default_rng(spec.seed)

    # subjects
    group_sizes = {
        CognitiveLabel.NORMAL: spec.n_normal,
        CognitiveLabel.MCI: spec.n_mci,
        CognitiveLabel.AD: spec.n_ad,
    }
    subject_rows = []
    subjects_by_group: dict[CognitiveLabel, list[str]] = {g: [] for g in _GROUPS}
    idx = 0
    for grp in _GROUPS:
        for _ in range(group_sizes[grp]):
            idx += 1
            sid = f"S{idx:03d}"
            subjects_by_group[grp].append(sid)
            zs = _BATTERY_Z[grp] + _BATTERY_Z_SD * rng.standard_normal(len(_TERMS))
            raw = {}
            for (name, mean, sd), z in zip(_TERMS, zs):
                raw[name] = mean + sd * float(z)
            raw["B"] = max(raw["B"], 0.0)
            raw["T"] = max(raw["T"], 1.0)
            battery = NeuropsychBattery(**raw)
            cogstat = compute_cogstat(battery)
            mu, sdv = _MOCA[grp]
            moca = float(np.clip(mu + sdv * rng.standard_normal(), 0.0, 30.0))
            subject_rows.append(
                [sid, grp.value, _f(cogstat), _f(round(moca, 1))]
                + [_f(raw[n]) for n, _, _ in _TERMS]
            )

    # segments
    segment_rows = []
    segments_by_scenario: dict[str, list[str]] = {}
    for name in sorted(spec.scenarios):
        sc = spec.scenarios[name]
        ids = []
        lengths = sc.median_length_m + 40.0 * rng.standard_normal(sc.n_segments)
        lengths = np.clip(lengths, 30.0, 500.0)
        speeds = sc.median_speed_mph + 5.0 * rng.standard_normal(sc.n_segments)
        speeds = np.clip(np.round(speeds * 2) / 2, 15.0, 75.0)
        for j in range(sc.n_segments):
            seg_id = f"{name}-seg{j:05d}"
            ids.append(seg_id)
            segment_rows.append(
                [seg_id, name, _f(round(float(lengths[j]), 1)), _f(float(speeds[j])), name]
            )
        segments_by_scenario[name] = ids

    # trips: exact unique (subject, segment) pair targets per group, then
    # repeats over the already-chosen pairs up to the total trip target
    trip_rows = []
    clip_rows = []
    ledger_scen: dict[str, dict] = {}
    coverage: dict[str, set] = {sid: set() for g in _GROUPS for sid in subjects_by_group[g]}
    drive_counter: dict[str, int] = {}
    trip_no = 0

    def timestamp(n: int) -> str:
        day, rem = divmod(n, 1440)
        hh, mm = divmod(rem, 60)
        return f"2024-{1 + day // 28:02d}-{1 + day % 28:02d}T{hh:02d}:{mm:02d}:00"

    for name in sorted(spec.scenarios):
        sc = spec.scenarios[name]
        seg_ids = segments_by_scenario[name]
        scen_pairs = []
        group_unique = {}
        for grp, target in zip(_GROUPS, sc.unique_trips):
            subs = subjects_by_group[grp]
            group_unique[grp] = target
            if target == 0 or not subs:
                continue
            cells = rng.choice(len(subs) * len(seg_ids), size=target, replace=False)
            cells.sort()
            for cell in cells:
                s_i, g_i = divmod(int(cell), len(seg_ids))
                scen_pairs.append((subs[s_i], seg_ids[g_i]))
        t_u = len(scen_pairs)
        extra = sc.total_trips - t_u
        repeats = rng.integers(0, t_u, size=extra) if t_u and extra else np.array([], dtype=int)

        all_trips = list(scen_pairs) + [scen_pairs[int(i)] for i in repeats]
        valid_by_label = {"normal": 0, "ad_aging": 0}
        status_counts = {"pure": 0, "blackframe": 0, "missing": 0}
        subject_label = {
            sid: binary_label(grp).value
            for grp in _GROUPS
            for sid in subjects_by_group[grp]
        }
        seg_geometry = {row[0]: (float(row[2]), float(row[3])) for row in segment_rows}

        for k, (sid, seg_id) in enumerate(all_trips):
            dn = drive_counter.get(sid, 0) + 1
            drive_counter[sid] = dn
            drive_id = f"{sid}-d{dn:05d}"
            trip_rows.append([sid, drive_id, seg_id, timestamp(trip_no)])
            coverage[sid].add(seg_id)
            # one clip per unique trip (first traversal of the pair)
            if k < t_u:
                status = rng.choice(
                    list(_STATUS_P), p=list(_STATUS_P.values())
                )
                status_counts[status] += 1
                length_m, mph = seg_geometry[seg_id]
                duration_min = (length_m / 1609.344) / mph * 60.0
                clip_rows.append(
                    [
                        sid,
                        drive_id,
                        f"{drive_id}-c1",
                        seg_id,
                        status,
                        _f(round(duration_min, 4)),
                        timestamp(trip_no),
                    ]
                )
                if status != "missing":
                    valid_by_label[subject_label[sid]] += 1
            trip_no += 1

        scen_subjects = {sid for sid, _ in scen_pairs}
        ledger_scen[name] = {
            "segments": sc.n_segments,
            "exposure": {
                "n_u": group_unique[CognitiveLabel.NORMAL],
                "m_u": group_unique[CognitiveLabel.MCI],
                "a_u": group_unique[CognitiveLabel.AD],
                "t_u": t_u,
                "t_bar_u": len(all_trips),
                "n_subjects": len(scen_subjects),
                "t_avg": len(all_trips) / len(scen_subjects) if scen_subjects else 0.0,
            },
            "clips": dict(status_counts, valid=status_counts["pure"] + status_counts["blackframe"]),
            "valid_by_label": valid_by_label,
            "delta": sc.delta,
            "sigma": sc.sigma,
        }

    total_segments = sum(sc.n_segments for sc in spec.scenarios.values())
    ledger = {
        "seed": spec.seed,
        "subjects": {
            "n_normal": spec.n_normal,
            "n_mci": spec.n_mci,
            "n_ad": spec.n_ad,
            "binary": {
                "normal": spec.n_normal,
                "ad_aging": spec.n_mci + spec.n_ad,
            },
        },
        "battery_params": {
            "group_z_offset": {g.value: _BATTERY_Z[g] for g in _GROUPS},
            "z_sd": _BATTERY_Z_SD,
        },
        "scenarios": ledger_scen,
        "coverage": {
            sid: (len(segs) / total_segments if total_segments else 0.0)
            for sid, segs in sorted(coverage.items())
        },
    }

    def write_csv(fname, header, rows):
        with open(os.path.join(out_dir, fname), "w", encoding="utf-8", newline="") as fh:
            fh.write(",".join(header) + "\n")
            for row in rows:
                fh.write(",".join(str(c) for c in row) + "\n")

    from .ingestion import CLIP_HEADER, SEGMENT_HEADER, SUBJECT_HEADER, TRIP_HEADER

    write_csv("subjects.csv", SUBJECT_HEADER, subject_rows)
    write_csv("segments.csv", SEGMENT_HEADER, segment_rows)
    write_csv("trips.csv", TRIP_HEADER, trip_rows)
    write_csv("clips.csv", CLIP_HEADER, clip_rows)
    with open(os.path.join(out_dir, "ledger.json"), "w", encoding="utf-8") as fh:
        json.dump(ledger, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return ledger
