"""Randomized numeric self-checks: loss gradient, NMS and IOU against their oracles."""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from . import geometry, gridcodec, loss, oracles, postprocess
from .geometry import BoundingBox, ScoredDetection
from .gridcodec import DetectionTensor, GridConfig, GroundTruthObject

GRAD_STEP = 1e-5
GRAD_RTOL = 1e-4
IOU_ORACLE_ATOL = 2e-3
# 1000 px per image side leaves up to ~4e-3 quantization error on thin overlaps
IOU_ORACLE_RESOLUTION = 2000


class SuiteResult(NamedTuple):
    name: str
    passed: bool
    detail: str


def random_box(rng: np.random.Generator, min_size: float = 0.0, max_size: float = 1.0) -> BoundingBox:
    w, h = rng.uniform(min_size, max_size, 2)
    x, y = rng.uniform(0, 1, 2)
    return BoundingBox(x, y, w, h)


def random_objects(rng: np.random.Generator, config: GridConfig, max_objects: int | None = None) -> list[GroundTruthObject]:
    """Conflict-free objects: at most one center per grid cell."""
    n_cells = config.S * config.S
    k = int(rng.integers(0, (max_objects or n_cells) + 1))
    k = min(k, n_cells)
    objs = []
    for cell in rng.choice(n_cells, size=k, replace=False):
        row, col = divmod(int(cell), config.S)
        # keep centers away from cell borders so floor() is unambiguous
        x = (col + rng.uniform(0.01, 0.99)) / config.S
        y = (row + rng.uniform(0.01, 0.99)) / config.S
        w, h = rng.uniform(0.05, 1.0, 2)
        objs.append(GroundTruthObject(BoundingBox(x, y, w, h), int(rng.integers(config.C))))
    return objs


def random_loss_instance(rng: np.random.Generator):
    """(prediction, target) with S<=4, B<=2, C<=3 and predicted w, h in [0.1, 1]."""
    cfg = GridConfig(int(rng.integers(1, 5)), int(rng.integers(1, 3)), int(rng.integers(1, 4)))
    target = gridcodec.encode(random_objects(rng, cfg), cfg)
    cells = np.empty((cfg.S, cfg.S, cfg.cell_width))
    boxes = rng.uniform(0, 1, (cfg.S, cfg.S, cfg.B, 5))
    boxes[..., 2:4] = rng.uniform(0.1, 1.0, (cfg.S, cfg.S, cfg.B, 2))
    cells[..., : 5 * cfg.B] = boxes.reshape(cfg.S, cfg.S, 5 * cfg.B)
    cells[..., 5 * cfg.B :] = rng.uniform(0, 1, (cfg.S, cfg.S, cfg.C))
    return DetectionTensor(cfg, cells), target


def gradient_max_error(prediction: DetectionTensor, target: DetectionTensor, weights=loss.LossWeights()) -> float:
    assignment = loss.compute_assignment(prediction, target)
    analytic = loss.loss_gradient(prediction, target, weights, assignment).values

    def f(v):
        return loss.yolo_loss(DetectionTensor(prediction.config, v), target, weights, assignment).total

    numeric = oracles.central_difference_gradient(f, prediction.values, GRAD_STEP)
    return float(np.max(oracles.relative_error(analytic, numeric)))


def gradient_suite(seed: int = 0, n: int = 20) -> SuiteResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for i in range(n):
        pred, target = random_loss_instance(rng)
        err = gradient_max_error(pred, target)
        worst = max(worst, err)
        if not err < GRAD_RTOL:
            return SuiteResult("gradient", False, f"instance {i}: relative error {err:.3g} >= {GRAD_RTOL}")
    return SuiteResult("gradient", True, f"{n} instances, worst relative error {worst:.3g}")


def random_detections(rng: np.random.Generator, max_boxes: int = 10, n_classes: int = 2) -> list[ScoredDetection]:
    """Clustered boxes with coarse scores so overlaps and score ties are common."""
    n = int(rng.integers(1, max_boxes + 1))
    dets = []
    for _ in range(n):
        x, y = rng.uniform(0.3, 0.7, 2)
        w, h = rng.uniform(0.1, 0.5, 2)
        score = float(rng.integers(1, 6)) / 5
        dets.append(ScoredDetection(BoundingBox(x, y, w, h), int(rng.integers(n_classes)), score))
    return dets


def nms_suite(seed: int = 0, n: int = 200, iou_threshold: float = 0.3) -> SuiteResult:
    rng = np.random.default_rng(seed)
    for i in range(n):
        dets = random_detections(rng)
        got = postprocess.nms(dets, iou_threshold)
        want = oracles.brute_force_nms(dets, iou_threshold)
        if [id(d) for d in got] != [id(d) for d in want]:
            return SuiteResult("nms", False, f"instance {i}: greedy kept {len(got)}, oracle kept {len(want)}")
    return SuiteResult("nms", True, f"{n} instances agree with the subset oracle")


def iou_suite(seed: int = 0, n_props: int = 1000, n_oracle: int = 200) -> SuiteResult:
    rng = np.random.default_rng(seed)
    for i in range(n_props):
        a, b = random_box(rng), random_box(rng)
        ab, ba = geometry.iou(a, b), geometry.iou(b, a)
        if ab != ba or not 0.0 <= ab <= 1.0:
            return SuiteResult("iou", False, f"pair {i}: iou(a,b)={ab}, iou(b,a)={ba}")
        if a.w > 0 and a.h > 0 and geometry.iou(a, a) != 1.0:
            return SuiteResult("iou", False, f"pair {i}: iou(a,a) != 1")
    worst = 0.0
    for i in range(n_oracle):
        a, b = random_box(rng, 0.1, 0.9), random_box(rng, 0.1, 0.9)
        err = abs(geometry.iou(a, b) - oracles.rasterized_iou(a, b, IOU_ORACLE_RESOLUTION))
        worst = max(worst, err)
        if err > IOU_ORACLE_ATOL:
            return SuiteResult("iou", False, f"oracle pair {i}: |iou - raster| = {err:.3g}")
    return SuiteResult("iou", True, f"{n_props} property pairs, {n_oracle} oracle pairs, worst raster gap {worst:.3g}")


def run_all(seed: int = 0) -> list[SuiteResult]:
    return [gradient_suite(seed), nms_suite(seed), iou_suite(seed)]
