"""
Normalized bounding boxes and intersection-over-union.

Boxes are stored center-parameterized (x, y, w, h), every field a fraction
of the image extent. Corner form is derived on demand.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class BoundingBox:
    x: float
    y: float
    w: float
    h: float

    def __post_init__(self):
        for name in ("x", "y", "w", "h"):
            v = float(getattr(self, name))
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"BoundingBox.{name}={v} outside [0, 1]")
            object.__setattr__(self, name, v)

    @property
    def area(self) -> float:
        left, top, right, bottom = to_corner_form(self)
        return (right - left) * (bottom - top)

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.x, self.y, self.w, self.h)


@dataclass(frozen=True)
class ScoredDetection:
    box: BoundingBox
    category: int
    score: float

    def __post_init__(self):
        if not 0.0 <= self.score <= 1.0:
            raise ValueError(f"score {self.score} outside [0, 1]")
        if self.category < 0:
            raise ValueError(f"negative category {self.category}")

    def to_dict(self) -> dict:
        return {"class": int(self.category), "score": float(self.score), "box": list(self.box.as_tuple())}

    @classmethod
    def from_dict(cls, d: dict) -> "ScoredDetection":
        return cls(BoundingBox(*d["box"]), int(d["class"]), float(d["score"]))


def to_corner_form(b: BoundingBox) -> tuple[float, float, float, float]:
    """Return (left, top, right, bottom)."""
    hw, hh = b.w / 2, b.h / 2
    return (b.x - hw, b.y - hh, b.x + hw, b.y + hh)


def from_corner_form(left: float, top: float, right: float, bottom: float) -> BoundingBox:
    return BoundingBox((left + right) / 2, (top + bottom) / 2, right - left, bottom - top)


def iou_xywh(a, b):
    """IOU of center-form boxes given as (..., 4) arrays; broadcasts.

    No range validation, so it accepts raw network outputs. Union area 0
    yields 0.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    al, at = a[..., 0] - a[..., 2] / 2, a[..., 1] - a[..., 3] / 2
    ar, ab = a[..., 0] + a[..., 2] / 2, a[..., 1] + a[..., 3] / 2
    bl, bt = b[..., 0] - b[..., 2] / 2, b[..., 1] - b[..., 3] / 2
    br, bb = b[..., 0] + b[..., 2] / 2, b[..., 1] + b[..., 3] / 2

    iw = np.clip(np.minimum(ar, br) - np.maximum(al, bl), 0.0, None)
    ih = np.clip(np.minimum(ab, bb) - np.maximum(at, bt), 0.0, None)
    inter = iw * ih
    # areas from corners so that identical boxes give inter == union exactly
    union = (ar - al) * (ab - at) + (br - bl) * (bb - bt) - inter
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(union > 0, inter / np.where(union > 0, union, 1.0), 0.0)
    return out


def iou(a: BoundingBox, b: BoundingBox) -> float:
    return float(iou_xywh(a.as_tuple(), b.as_tuple()))
