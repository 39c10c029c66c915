"""
Published detection outcomes for the four traffic-scene experiments.

Experiments 1 and 2 carry three per-photo marks per placement. Experiments 3
and 4 were published as one majority ("final") mark per placement and are
stored pre-aggregated. Placements marked "-" (not photographed) are kept
with ``measured=False`` and left out of every count.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .scenegen import EXPERIMENT_DISTANCES_FT, LANES, Lane, MATRIX_OFFSETS_FT, PHOTOS_PER_TRIAL, build_layout


@dataclass(frozen=True)
class PhotoOutcome:
    """``None`` for a target that is absent or whose individual mark was not published."""

    detected_person: bool | None
    detected_car: bool | None
    success: bool

    @classmethod
    def single(cls, kind: str, ok: bool) -> "PhotoOutcome":
        if kind == "person":
            return cls(ok, None, ok)
        return cls(None, ok, ok)

    def __post_init__(self):
        marks = [m for m in (self.detected_person, self.detected_car) if m is not None]
        if marks and self.success != all(marks):
            raise ValueError("success must be the conjunction of the detection marks")


@dataclass(frozen=True)
class Placement:
    lane: Lane
    offset_ft: int


@dataclass(frozen=True)
class TrialRecord:
    experiment_id: int
    camera_distance_ft: int
    car: Placement | None
    person: Placement | None
    photos: tuple[PhotoOutcome, ...]
    measured: bool = True
    pre_aggregated: bool = False

    @property
    def photo_count(self) -> int:
        """Photos actually taken for this placement."""
        if not self.measured:
            return 0
        return PHOTOS_PER_TRIAL if self.pre_aggregated else len(self.photos)

    @property
    def final_result(self) -> bool:
        if not self.measured:
            raise ValueError("unmeasured placement has no final result")
        if self.pre_aggregated:
            return self.photos[0].success
        return majority_final_result(self.photos)


@dataclass(frozen=True)
class RateRow:
    distance_ft: int
    passes: int
    total: int
    rate_pct: float


@dataclass
class SuccessRateReport:
    experiment_id: int
    rows: list[RateRow]
    notes: list[str] = field(default_factory=list)
    aggregation: str = "majority of 3 photos; pre-aggregated marks for experiments 3-4; unmeasured excluded"

    def row(self, distance_ft) -> RateRow:
        for r in self.rows:
            if r.distance_ft == distance_ft:
                return r
        raise KeyError(distance_ft)

    def to_dict(self) -> dict:
        return {
            "experiment": self.experiment_id,
            "rows": [
                {"distance_ft": r.distance_ft, "passes": r.passes, "total": r.total, "rate_pct": round(r.rate_pct, 2)}
                for r in self.rows
            ],
            "notes": list(self.notes),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def majority_final_result(photos: Sequence[PhotoOutcome]) -> bool:
    if len(photos) != 3:
        raise ValueError(f"majority rule needs exactly 3 photos, got {len(photos)}")
    return sum(p.success for p in photos) >= 2


# ---------------------------------------------------------------------------
# Transcribed tables. "1" = detected / success, "0" = failure, "-" = not shot.

# Table I: lane -> marks at 10, 20, 30, 40, 50, 60 ft
_EXP1 = {
    "L": ["-", "110", "111", "111", "111", "000"],
    "M": ["111", "111", "111", "111", "100", "000"],
    "R": ["-", "111", "111", "111", "110", "111"],
}
_EXP2 = {
    "L": ["111", "111", "111", "111", "111", "111"],
    "M": ["111", "111", "111", "111", "111", "011"],
    "R": ["111", "111", "111", "111", "111", "111"],
}

# Table II: (person offset, person lane) -> final marks for car L/M/R at 40, 50, 60 ft
_EXP3 = {
    (0, "L"): "000 111 110",
    (0, "M"): "111 000 110",
    (0, "R"): "110 101 000",
    (10, "L"): "110 111 110",
    (10, "M"): "110 000 111",
    (10, "R"): "110 110 110",
    (20, "L"): "111 110 111",
    (20, "M"): "111 000 111",
    (20, "R"): "111 111 111",
}

# Tables III-V: person lane -> (car offset, car lane) -> final marks at 40, 50, 60 ft
_EXP4 = {
    "L": {(0, "M"): "100", (0, "R"): "101", (10, "M"): "100", (10, "R"): "110", (20, "M"): "100", (20, "R"): "110"},
    "M": {(0, "L"): "100", (0, "R"): "100", (10, "L"): "110", (10, "R"): "100", (20, "L"): "110", (20, "R"): "110"},
    "R": {(0, "M"): "000", (0, "L"): "100", (10, "M"): "100", (10, "L"): "100", (20, "M"): "111", (20, "L"): "111"},
}

# Success rates quoted in the results discussion, (experiment, distance) -> percent
QUOTED_RATES = {
    (3, 40): 81.48,
    (3, 50): 77.78,
    (3, 60): 44.4,
    (4, 40): 100.0,
    (4, 50): 33.33,
}
QUOTE_TOLERANCE_PCT = 0.05


def embedded_dataset() -> list[TrialRecord]:
    """All published outcomes, in the same order as ``scenegen.build_layout``."""
    records = []
    for eid, table, kind in ((1, _EXP1, "person"), (2, _EXP2, "car")):
        for i, d in enumerate(EXPERIMENT_DISTANCES_FT[eid]):
            for lane in LANES:
                marks = table[lane.value][i]
                place = Placement(lane, 0)
                car_p, person_p = (None, place) if kind == "person" else (place, None)
                if marks == "-":
                    records.append(TrialRecord(eid, d, car_p, person_p, (), measured=False))
                    continue
                photos = tuple(PhotoOutcome.single(kind, m == "1") for m in marks)
                records.append(TrialRecord(eid, d, car_p, person_p, photos))

    for j, d in enumerate(EXPERIMENT_DISTANCES_FT[3]):
        for ci, cl in enumerate(LANES):
            for off in MATRIX_OFFSETS_FT:
                for pl in LANES:
                    mark = _EXP3[(off, pl.value)].split()[ci][j] == "1"
                    records.append(
                        TrialRecord(3, d, Placement(cl, 0), Placement(pl, off),
                                    (PhotoOutcome(None, None, mark),), pre_aggregated=True)
                    )

    for j, d in enumerate(EXPERIMENT_DISTANCES_FT[4]):
        for pl in LANES:
            for off in MATRIX_OFFSETS_FT:
                for cl in LANES:
                    if cl == pl:
                        continue
                    mark = _EXP4[pl.value][(off, cl.value)][j] == "1"
                    records.append(
                        TrialRecord(4, d, Placement(cl, off), Placement(pl, 0),
                                    (PhotoOutcome(None, None, mark),), pre_aggregated=True)
                    )
    return records


def success_rate(records: Iterable[TrialRecord], experiment_id: int, camera_distance_ft) -> tuple[int, int, float]:
    """(passes, total, percent) over measured placements of one experiment at one distance."""
    sl = [
        r for r in records
        if r.experiment_id == experiment_id and r.camera_distance_ft == camera_distance_ft and r.measured
    ]
    if not sl:
        raise ValueError(f"no measured records for experiment {experiment_id} at {camera_distance_ft} ft")
    passes = sum(r.final_result for r in sl)
    return passes, len(sl), 100.0 * passes / len(sl)


def rate_report(records: Sequence[TrialRecord], experiment_id: int) -> SuccessRateReport:
    rows = []
    for d in EXPERIMENT_DISTANCES_FT[experiment_id]:
        p, t, r = success_rate(records, experiment_id, d)
        rows.append(RateRow(d, p, t, r))
    return SuccessRateReport(experiment_id, rows)


def figure6_report(records: Sequence[TrialRecord]) -> tuple[SuccessRateReport, SuccessRateReport]:
    """Experiments 3 and 4 side by side, noting where table counts disagree with the quoted rates."""
    out = []
    for eid in (3, 4):
        rep = rate_report(records, eid)
        for row in rep.rows:
            quoted = QUOTED_RATES.get((eid, row.distance_ft))
            if quoted is not None and abs(row.rate_pct - quoted) > QUOTE_TOLERANCE_PCT:
                rep.notes.append(
                    f"experiment {eid} at {row.distance_ft} ft: tables give {row.passes}/{row.total} = "
                    f"{row.rate_pct:.2f}% but the text quotes {quoted:.2f}%"
                )
        out.append(rep)
    return out[0], out[1]


def validate_dataset(records: Sequence[TrialRecord], reports: Sequence[SuccessRateReport] | None = None) -> list[str]:
    """Check dataset invariants; return the names of failed checks with details (empty when clean)."""
    failures = []
    photos = sum(r.photo_count for r in records)
    if photos != 507:
        failures.append(f"photo-count: expected 507 photos, found {photos}")
    for eid in EXPERIMENT_DISTANCES_FT:
        layout = build_layout(eid)
        n = sum(1 for r in records if r.experiment_id == eid and r.measured)
        if n != len(layout.trials):
            failures.append(f"cardinality: experiment {eid} has {n} measured trials, expected {len(layout.trials)}")
            continue
        for d in EXPERIMENT_DISTANCES_FT[eid]:
            want = len(layout.at_distance(d))
            got = sum(1 for r in records if r.experiment_id == eid and r.measured and r.camera_distance_ft == d)
            if got != want:
                failures.append(f"cardinality: experiment {eid} at {d} ft has {got} trials, expected {want}")
    for r in records:
        if r.measured and not r.pre_aggregated and len(r.photos) != PHOTOS_PER_TRIAL:
            failures.append(f"photos-per-trial: {r} has {len(r.photos)} photos")
            break
        if r.pre_aggregated and len(r.photos) != 1:
            failures.append(f"pre-aggregated: {r} must carry exactly one outcome")
            break
    if reports is None:
        reports = []
        for eid in EXPERIMENT_DISTANCES_FT:
            try:
                reports.append(rate_report(records, eid))
            except ValueError as exc:
                failures.append(f"rates: {exc}")
    for rep in reports:
        for row in rep.rows:
            if not (0 <= row.passes <= row.total and 0.0 <= row.rate_pct <= 100.0):
                failures.append(
                    f"rate-bounds: experiment {rep.experiment_id} at {row.distance_ft} ft "
                    f"passes={row.passes} total={row.total} rate={row.rate_pct}"
                )
    return failures


CSV_FIELDS = [
    "experiment", "camera_distance_ft", "car_lane", "car_offset_ft", "person_lane", "person_offset_ft",
    "photo_index", "detected_person", "detected_car", "success", "pre_aggregated",
]


def _b(v):
    return "" if v is None else str(int(v))


def records_to_csv(records: Iterable[TrialRecord]) -> str:
    """One row per photo (or per pre-aggregated trial). Unmeasured placements are not written."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for r in records:
        if not r.measured:
            continue
        for i, ph in enumerate(r.photos):
            w.writerow([
                r.experiment_id, r.camera_distance_ft,
                r.car.lane.value if r.car else "", r.car.offset_ft if r.car else "",
                r.person.lane.value if r.person else "", r.person.offset_ft if r.person else "",
                i, _b(ph.detected_person), _b(ph.detected_car), _b(ph.success), _b(r.pre_aggregated),
            ])
    return buf.getvalue()


def records_from_csv(text: str) -> list[TrialRecord]:
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames != CSV_FIELDS:
        raise ValueError(f"unexpected CSV header {reader.fieldnames}")

    def opt_bool(s):
        return None if s == "" else bool(int(s))

    grouped: dict[tuple, list] = {}
    for row in reader:
        key = (
            int(row["experiment"]), int(row["camera_distance_ft"]),
            row["car_lane"], row["car_offset_ft"], row["person_lane"], row["person_offset_ft"],
            row["pre_aggregated"] == "1",
        )
        grouped.setdefault(key, []).append(
            (int(row["photo_index"]),
             PhotoOutcome(opt_bool(row["detected_person"]), opt_bool(row["detected_car"]), row["success"] == "1"))
        )
    records = []
    for (eid, d, cl, co, pl, po, agg), photos in grouped.items():
        car_p = Placement(Lane(cl), int(co)) if cl else None
        person_p = Placement(Lane(pl), int(po)) if pl else None
        photos.sort(key=lambda t: t[0])
        records.append(TrialRecord(eid, d, car_p, person_p, tuple(p for _, p in photos), pre_aggregated=agg))
    return records
