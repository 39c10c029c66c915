"""
Sum-squared YOLO training loss and its analytic gradient.

Five terms: center offsets, square-rooted sizes, confidence of the responsible
predictor (target = IOU of that predictor with the truth box), confidence of
every other predictor (target = 0), and per-cell class probabilities.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from typing import NamedTuple, Sequence

import numpy as np

from .errors import DomainError, ShapeError
from .geometry import BoundingBox, iou_xywh
from .gridcodec import DetectionTensor


@dataclass(frozen=True)
class LossWeights:
    lambda_coord: float = 5.0
    lambda_noobj: float = 0.5
    lambda_obj: float = 1.0
    lambda_class: float = 1.0

    def __post_init__(self):
        for f in fields(self):
            if getattr(self, f.name) < 0:
                raise ValueError(f"{f.name} must be nonnegative")


@dataclass(frozen=True)
class LossBreakdown:
    coord_xy: float
    coord_wh: float
    conf_obj: float
    conf_noobj: float
    classification: float
    total: float


class Assignment(NamedTuple):
    """Per-cell bookkeeping shared by the loss and its gradient.

    ``responsible`` is -1 for cells without an object. ``iou_target`` holds
    the confidence target of the responsible predictor (0 elsewhere).
    """

    occupied: np.ndarray  # (S, S) bool
    responsible: np.ndarray  # (S, S) int
    iou_target: np.ndarray  # (S, S) float


def assign_responsible_predictor(predicted_boxes: Sequence[BoundingBox], truth_box: BoundingBox) -> int:
    """Index of the predictor with the highest IOU against the truth; ties go to the lowest index."""
    if len(predicted_boxes) == 0:
        raise ValueError("need at least one predictor")
    arr = np.array([p.as_tuple() if isinstance(p, BoundingBox) else tuple(p) for p in predicted_boxes])
    ious = iou_xywh(arr, np.asarray(truth_box.as_tuple()))
    return int(np.argmax(ious))


def _to_image_coords(boxes: np.ndarray, S: int) -> np.ndarray:
    """(S, S, ..., >=4) cell-relative boxes -> (S, S, ..., 4) image-normalized."""
    rows = np.arange(S).reshape((S, 1) + (1,) * (boxes.ndim - 3))
    cols = np.arange(S).reshape((1, S) + (1,) * (boxes.ndim - 3))
    out = np.empty(boxes.shape[:-1] + (4,))
    out[..., 0] = (cols + boxes[..., 0]) / S
    out[..., 1] = (rows + boxes[..., 1]) / S
    out[..., 2] = boxes[..., 2]
    out[..., 3] = boxes[..., 3]
    return out


def _validate(prediction: DetectionTensor, target: DetectionTensor) -> None:
    if prediction.config != target.config:
        raise ShapeError(f"config mismatch: {prediction.config} vs {target.config}")
    pb = prediction.boxes()
    if np.any(pb[..., 2:4] < 0):
        raise DomainError("predicted w and h must be nonnegative (square root)")
    tb = target.boxes()
    conf = tb[..., 0, 4]
    if not np.all((conf == 0) | (conf == 1)) or np.any(tb[..., 1:, 4] != 0):
        raise ValueError("target confidences must be 1 in slot 0 of occupied cells and 0 elsewhere")
    probs = target.class_probs()
    occ = conf == 1
    if np.any(probs[~occ] != 0) or not np.allclose(probs[occ].sum(axis=-1), 1.0):
        raise ValueError("target class vectors must be one-hot in occupied cells and zero elsewhere")


def compute_assignment(prediction: DetectionTensor, target: DetectionTensor) -> Assignment:
    S = prediction.config.S
    pb = prediction.boxes()
    tb = target.boxes()[..., 0, :]
    occupied = tb[..., 4] == 1
    pred_img = _to_image_coords(pb, S)
    truth_img = _to_image_coords(tb, S)
    ious = iou_xywh(pred_img, truth_img[:, :, None, :])  # (S, S, B)
    responsible = np.where(occupied, np.argmax(ious, axis=-1), -1)
    iou_target = np.where(occupied, np.take_along_axis(ious, np.maximum(responsible, 0)[..., None], -1)[..., 0], 0.0)
    return Assignment(occupied, responsible, iou_target)


def _masks(assignment: Assignment, B: int) -> np.ndarray:
    return assignment.occupied[..., None] & (np.arange(B) == assignment.responsible[..., None])


def yolo_loss(
    prediction: DetectionTensor,
    target: DetectionTensor,
    weights: LossWeights = LossWeights(),
    assignment: Assignment | None = None,
) -> LossBreakdown:
    """Evaluate the loss.

    ``assignment`` may be passed to freeze the responsible predictors and IOU
    targets, e.g. when finite-differencing around a fixed point.
    """
    _validate(prediction, target)
    if assignment is None:
        assignment = compute_assignment(prediction, target)
    B = prediction.config.B
    resp = _masks(assignment, B)
    pb = prediction.boxes()
    tb = target.boxes()[..., 0:1, :]

    sq_xy = (tb[..., 0] - pb[..., 0]) ** 2 + (tb[..., 1] - pb[..., 1]) ** 2
    sq_wh = (np.sqrt(tb[..., 2]) - np.sqrt(pb[..., 2])) ** 2 + (np.sqrt(tb[..., 3]) - np.sqrt(pb[..., 3])) ** 2
    sq_obj = (assignment.iou_target[..., None] - pb[..., 4]) ** 2
    sq_noobj = pb[..., 4] ** 2
    sq_cls = (target.class_probs() - prediction.class_probs()) ** 2

    coord_xy = weights.lambda_coord * float(np.sum(np.where(resp, sq_xy, 0.0)))
    coord_wh = weights.lambda_coord * float(np.sum(np.where(resp, sq_wh, 0.0)))
    conf_obj = weights.lambda_obj * float(np.sum(np.where(resp, sq_obj, 0.0)))
    conf_noobj = weights.lambda_noobj * float(np.sum(np.where(resp, 0.0, sq_noobj)))
    classification = weights.lambda_class * float(np.sum(np.where(assignment.occupied[..., None], sq_cls, 0.0)))
    total = coord_xy + coord_wh + conf_obj + conf_noobj + classification
    return LossBreakdown(coord_xy, coord_wh, conf_obj, conf_noobj, classification, total)


def loss_gradient(
    prediction: DetectionTensor,
    target: DetectionTensor,
    weights: LossWeights = LossWeights(),
    assignment: Assignment | None = None,
) -> DetectionTensor:
    """d(total loss)/d(prediction), same layout as the prediction tensor.

    The IOU confidence target is held constant. Raises DomainError when a
    responsible predictor has zero width or height.
    """
    _validate(prediction, target)
    if assignment is None:
        assignment = compute_assignment(prediction, target)
    cfg = prediction.config
    B = cfg.B
    resp = _masks(assignment, B)
    pb = prediction.boxes()
    tb = target.boxes()[..., 0:1, :]

    if np.any(resp & ((pb[..., 2] == 0) | (pb[..., 3] == 0))):
        raise DomainError("responsible predictor has w or h = 0; square-root derivative is singular")

    grad = np.zeros((cfg.S, cfg.S, cfg.cell_width))
    gb = np.zeros(pb.shape)
    lc = weights.lambda_coord
    gb[..., 0] = np.where(resp, -2 * lc * (tb[..., 0] - pb[..., 0]), 0.0)
    gb[..., 1] = np.where(resp, -2 * lc * (tb[..., 1] - pb[..., 1]), 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        sw, sh = np.sqrt(pb[..., 2]), np.sqrt(pb[..., 3])
        gb[..., 2] = np.where(resp, -lc * (np.sqrt(tb[..., 2]) - sw) / sw, 0.0)
        gb[..., 3] = np.where(resp, -lc * (np.sqrt(tb[..., 3]) - sh) / sh, 0.0)
    gb[..., 4] = np.where(
        resp,
        -2 * weights.lambda_obj * (assignment.iou_target[..., None] - pb[..., 4]),
        2 * weights.lambda_noobj * pb[..., 4],
    )
    grad[..., : 5 * B] = gb.reshape(cfg.S, cfg.S, 5 * B)
    grad[..., 5 * B :] = np.where(
        assignment.occupied[..., None],
        -2 * weights.lambda_class * (target.class_probs() - prediction.class_probs()),
        0.0,
    )
    return DetectionTensor(cfg, grad)
