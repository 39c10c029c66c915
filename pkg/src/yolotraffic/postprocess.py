"""Turn a prediction tensor into final detections: class scoring, thresholding, per-class NMS."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .geometry import ScoredDetection, iou
from .gridcodec import DetectionTensor, decode


@dataclass(frozen=True)
class PostprocessConfig:
    score_threshold: float = 0.2
    nms_iou_threshold: float = 0.5

    def __post_init__(self):
        for name in ("score_threshold", "nms_iou_threshold"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} outside [0, 1]")


def class_confidence(class_probs, box_confidence: float) -> np.ndarray:
    """Category-specific scores: Pr(class | object) * box confidence."""
    return np.asarray(class_probs, dtype=np.float64) * float(box_confidence)


def filter_by_score(detections: Sequence[ScoredDetection], threshold: float) -> list[ScoredDetection]:
    return [d for d in detections if d.score >= threshold]


def nms(detections: Sequence[ScoredDetection], iou_threshold: float) -> list[ScoredDetection]:
    """Greedy per-category non-max suppression.

    Candidates are visited by descending score, ties by input position. A
    candidate is dropped when its IOU with an already kept detection of the
    same category exceeds ``iou_threshold``.
    """
    order = sorted(range(len(detections)), key=lambda i: (-detections[i].score, i))
    kept: dict[int, list[ScoredDetection]] = {}
    out = []
    for i in order:
        d = detections[i]
        same = kept.setdefault(d.category, [])
        if any(iou(d.box, k.box) > iou_threshold for k in same):
            continue
        same.append(d)
        out.append(d)
    return out


def detect(tensor: DetectionTensor, config: PostprocessConfig = PostprocessConfig()) -> list[ScoredDetection]:
    candidates = []
    for cell in decode(tensor):
        for box, conf in zip(cell.boxes, cell.confidences):
            scores = class_confidence(cell.class_probs, conf)
            candidates.extend(ScoredDetection(box, cat, float(s)) for cat, s in enumerate(scores))
    return nms(filter_by_score(candidates, config.score_threshold), config.nms_iou_threshold)


def detections_to_jsonl(detections: Iterable[ScoredDetection]) -> str:
    return "".join(json.dumps(d.to_dict()) + "\n" for d in detections)


def detections_from_jsonl(text: str) -> list[ScoredDetection]:
    return [ScoredDetection.from_dict(json.loads(line)) for line in text.splitlines() if line.strip()]
