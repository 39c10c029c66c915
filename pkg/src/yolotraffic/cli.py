"""
Command-line entry point.

    yolotraffic validate
    yolotraffic rates --experiment 3 --format json
    yolotraffic figure6 --format csv --output fig6.csv
    yolotraffic simulate --experiment 3 --distance 40
    yolotraffic selfcheck --seed 0

Exit status: 0 success, 1 failed check, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import sys
from dataclasses import dataclass, field
from typing import Sequence

from . import evaldata, gridcodec, postprocess, scenegen, selfcheck
from .errors import EncodingConflictError
from .gridcodec import GridConfig, GroundTruthObject
from .postprocess import PostprocessConfig
from .scenegen import ObjectSizes, SceneConfig

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

SIMULATION_GRID = GridConfig(S=13, B=2, C=20)
VOC_CLASS_INDEX = {"car": 6, "person": 14}


class UsageError(Exception):
    pass


@dataclass
class CliConfig:
    output_format: str = "csv"
    output_path: str | None = None
    sizes: ObjectSizes = field(default_factory=ObjectSizes)
    focal_scale: float | None = None  # None: fit to keep all placements in frame
    image_aspect: float = scenegen.DEFAULT_ASPECT
    lane_spacing_ft: float = 10.0
    grid: GridConfig = SIMULATION_GRID
    thresholds: PostprocessConfig = field(default_factory=PostprocessConfig)

    def scene(self, camera_distance_ft: float) -> SceneConfig:
        f = self.focal_scale
        if f is None:
            f = scenegen.fit_focal_scale(self.image_aspect, self.lane_spacing_ft, self.sizes)
        return SceneConfig(camera_distance_ft, f, self.image_aspect, self.lane_spacing_ft)


_SIZE_KEYS = {f.name for f in dataclasses.fields(ObjectSizes)}
_FLOAT_KEYS = {"focal_scale", "image_aspect", "lane_spacing_ft", "score_threshold", "nms_iou_threshold"} | _SIZE_KEYS
_INT_KEYS = {"grid_s", "grid_b", "grid_c"}
_STR_KEYS = {"output_format", "output_path"}


def load_config(path: str | None) -> CliConfig:
    """Read a flat ``key = value`` file; ``#`` starts a comment. Unknown keys are rejected."""
    cfg = CliConfig()
    if path is None:
        return cfg
    try:
        with open(path) as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    raw = {}
    for n, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{n}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _FLOAT_KEYS | _INT_KEYS | _STR_KEYS:
            raise UsageError(f"{path}:{n}: unknown key {key!r}")
        try:
            raw[key] = float(value) if key in _FLOAT_KEYS else int(value) if key in _INT_KEYS else value
        except ValueError as exc:
            raise UsageError(f"{path}:{n}: bad value for {key}: {value!r}") from exc

    try:
        sizes = {k: raw[k] for k in _SIZE_KEYS if k in raw}
        if sizes:
            cfg.sizes = dataclasses.replace(cfg.sizes, **sizes)
        for k in ("focal_scale", "image_aspect", "lane_spacing_ft", "output_format", "output_path"):
            if k in raw:
                setattr(cfg, k, raw[k])
        if _INT_KEYS & raw.keys():
            cfg.grid = GridConfig(raw.get("grid_s", cfg.grid.S), raw.get("grid_b", cfg.grid.B), raw.get("grid_c", cfg.grid.C))
        if {"score_threshold", "nms_iou_threshold"} & raw.keys():
            cfg.thresholds = PostprocessConfig(
                raw.get("score_threshold", cfg.thresholds.score_threshold),
                raw.get("nms_iou_threshold", cfg.thresholds.nms_iou_threshold),
            )
    except ValueError as exc:
        raise UsageError(f"{path}: {exc}") from exc
    return cfg


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _num(v: float, digits: int = 6) -> str:
    return f"{v:.{digits}f}"


def cmd_validate(records=None, reports=None, out=sys.stdout) -> int:
    records = evaldata.embedded_dataset() if records is None else records
    failures = evaldata.validate_dataset(records, reports)
    if failures:
        print(f"FAIL {failures[0]}", file=out)
        for f in failures[1:]:
            print(f"     {f}", file=out)
        return EXIT_FAIL
    photos = sum(r.photo_count for r in records)
    trials = "/".join(
        str(sum(1 for r in records if r.experiment_id == e and r.measured)) for e in (1, 2, 3, 4)
    )
    print(f"OK photos={photos} trials={trials}", file=out)
    return EXIT_OK


def render_rates(report: evaldata.SuccessRateReport, fmt: str) -> str:
    if fmt == "json":
        return report.to_json() + "\n"
    return _csv(
        ["experiment", "distance_ft", "passes", "total", "rate_pct"],
        [[report.experiment_id, r.distance_ft, r.passes, r.total, _num(r.rate_pct, 2)] for r in report.rows],
    )


def cmd_rates(experiment_id: int, fmt: str = "csv", records=None) -> str:
    if experiment_id not in scenegen.EXPERIMENT_DISTANCES_FT:
        raise UsageError(f"--experiment must be 1..4, got {experiment_id}")
    records = evaldata.embedded_dataset() if records is None else records
    return render_rates(evaldata.rate_report(records, experiment_id), fmt)


def cmd_figure6(fmt: str = "csv", records=None) -> str:
    records = evaldata.embedded_dataset() if records is None else records
    reports = evaldata.figure6_report(records)
    if fmt == "json":
        return json.dumps([r.to_dict() for r in reports]) + "\n"
    rows = []
    for rep in reports:
        for r in rep.rows:
            quoted = evaldata.QUOTED_RATES.get((rep.experiment_id, r.distance_ft))
            note = next((n for n in rep.notes if f"at {r.distance_ft} ft" in n), "")
            rows.append([
                rep.experiment_id, r.distance_ft, r.passes, r.total, _num(r.rate_pct, 2),
                "" if quoted is None else _num(quoted, 2), note,
            ])
    return _csv(["experiment", "distance_ft", "passes", "total", "rate_pct", "quoted_pct", "note"], rows)


def _class_index(kind: str, grid: GridConfig) -> int:
    if grid.C > max(VOC_CLASS_INDEX.values()):
        return VOC_CLASS_INDEX[kind]
    if grid.C < 2:
        raise UsageError("simulation needs at least 2 categories")
    return {"car": 0, "person": 1}[kind]


def simulate_trials(experiment_id: int, camera_distance_ft: float, cfg: CliConfig | None = None) -> list[dict]:
    """Project every placement at one distance and push it through encode -> detect."""
    cfg = cfg or CliConfig()
    if experiment_id not in scenegen.EXPERIMENT_DISTANCES_FT:
        raise UsageError(f"--experiment must be 1..4, got {experiment_id}")
    if camera_distance_ft not in scenegen.EXPERIMENT_DISTANCES_FT[experiment_id]:
        raise UsageError(
            f"experiment {experiment_id} distances are {scenegen.EXPERIMENT_DISTANCES_FT[experiment_id]}, "
            f"got {camera_distance_ft}"
        )
    scene = cfg.scene(camera_distance_ft)
    layout = scenegen.build_layout(experiment_id, cfg.sizes)
    rows = []
    for i, trial in enumerate(layout.at_distance(camera_distance_ft)):
        boxes = {o.kind: scenegen.project(o, scene) for o in trial.objects}
        overlap = None
        if len(trial.objects) == 2:
            overlap = scenegen.overlap_flag(trial.objects[0], trial.objects[1], scene)
        truth = [GroundTruthObject(boxes[o.kind], _class_index(o.kind, cfg.grid)) for o in trial.objects]
        try:
            tensor = gridcodec.encode(truth, cfg.grid)
        except EncodingConflictError:
            status, n_det = "conflict", None
        else:
            dets = postprocess.detect(tensor, cfg.thresholds)
            found = all(
                any(
                    d.category == t.category and d.score >= cfg.thresholds.score_threshold
                    and max(abs(p - q) for p, q in zip(d.box.as_tuple(), t.box.as_tuple())) < 1e-9
                    for d in dets
                )
                for t in truth
            )
            status, n_det = ("recovered" if found else "missed"), len(dets)
        rows.append({
            "trial": i,
            "car": _placement(trial.find("car")),
            "person": _placement(trial.find("person")),
            "car_box": list(boxes["car"].as_tuple()) if "car" in boxes else None,
            "person_box": list(boxes["person"].as_tuple()) if "person" in boxes else None,
            "overlap": overlap,
            "pipeline": status,
            "detections": n_det,
        })
    return rows


def _placement(obj):
    return None if obj is None else {"lane": obj.lane.value, "offset_ft": obj.offset_ft}


def cmd_simulate(experiment_id: int, camera_distance_ft: float, fmt: str = "csv", cfg: CliConfig | None = None) -> str:
    cfg = cfg or CliConfig()
    rows = simulate_trials(experiment_id, camera_distance_ft, cfg)
    if fmt == "json":
        g = cfg.grid
        return json.dumps({
            "experiment": experiment_id, "distance_ft": camera_distance_ft,
            "grid": {"s": g.S, "b": g.B, "c": g.C}, "trials": rows,
        }) + "\n"
    header = ["experiment", "distance_ft", "trial", "car_lane", "car_offset_ft", "person_lane", "person_offset_ft"]
    header += [f"{k}_{c}" for k in ("car", "person") for c in "xywh"] + ["overlap", "pipeline", "detections"]
    out = []
    for r in rows:
        line = [experiment_id, camera_distance_ft, r["trial"]]
        for k in ("car", "person"):
            p = r[k]
            line += ["", ""] if p is None else [p["lane"], p["offset_ft"]]
        for k in ("car_box", "person_box"):
            line += [""] * 4 if r[k] is None else [_num(v) for v in r[k]]
        line += ["" if r["overlap"] is None else int(r["overlap"]), r["pipeline"],
                 "" if r["detections"] is None else r["detections"]]
        out.append(line)
    return _csv(header, out)


def cmd_selfcheck(seed: int = 0, out=sys.stdout) -> int:
    status = EXIT_OK
    for res in selfcheck.run_all(seed):
        print(f"{'PASS' if res.passed else 'FAIL'} {res.name}: {res.detail}", file=out)
        if not res.passed:
            status = EXIT_FAIL
    return status


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("csv", "json"), default=None)
    common.add_argument("--output", default=None, help="write here instead of standard output")
    common.add_argument("--config", default=None, help="flat key = value file")
    common.add_argument("--seed", type=int, default=0)

    p = argparse.ArgumentParser(prog="yolotraffic", description=__doc__.split("\n\n")[0].strip())
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("validate", parents=[common], help="check embedded dataset invariants")
    r = sub.add_parser("rates", parents=[common], help="success rate per camera distance")
    r.add_argument("--experiment", type=int, required=True)
    sub.add_parser("figure6", parents=[common], help="experiment 3 vs 4 success rates")
    s = sub.add_parser("simulate", parents=[common], help="project a scene and run the synthetic pipeline")
    s.add_argument("--experiment", type=int, required=True)
    s.add_argument("--distance", type=float, required=True)
    sub.add_parser("selfcheck", parents=[common], help="gradient, NMS and IOU oracle suites")
    return p


def _emit(text: str, path: str | None):
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        cfg = load_config(args.config)
        fmt = args.format or cfg.output_format
        if fmt not in ("csv", "json"):
            raise UsageError(f"unknown output format {fmt!r}")
        out_path = args.output or cfg.output_path
        if args.command == "validate":
            buf = io.StringIO()
            code = cmd_validate(out=buf)
            _emit(buf.getvalue(), out_path)
            return code
        if args.command == "selfcheck":
            buf = io.StringIO()
            code = cmd_selfcheck(args.seed, out=buf)
            _emit(buf.getvalue(), out_path)
            return code
        if args.command == "rates":
            text = cmd_rates(args.experiment, fmt)
        elif args.command == "figure6":
            text = cmd_figure6(fmt)
        else:
            dist = int(args.distance) if float(args.distance).is_integer() else args.distance
            text = cmd_simulate(args.experiment, dist, fmt, cfg)
    except UsageError as exc:
        print(f"yolotraffic: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    _emit(text, out_path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
