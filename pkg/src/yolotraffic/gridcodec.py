"""
Grid-cell target encoding and prediction decoding.

A detection tensor is a flat float64 array of length ``S*S*(5B+C)``. Cells
are stored row-major; each cell holds B five-tuples
``(x_offset, y_offset, w, h, confidence)`` followed by C class values.
``x_offset``/``y_offset`` are relative to the cell, ``w``/``h`` to the image.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .errors import DomainError, EncodingConflictError, ShapeError
from .geometry import BoundingBox


@dataclass(frozen=True)
class GridConfig:
    S: int = 7
    B: int = 2
    C: int = 20

    def __post_init__(self):
        for name in ("S", "B", "C"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise ValueError(f"GridConfig.{name} must be a positive integer, got {v!r}")

    @property
    def cell_width(self) -> int:
        return 5 * self.B + self.C

    @property
    def size(self) -> int:
        return self.S * self.S * self.cell_width


@dataclass(frozen=True, eq=False)
class DetectionTensor:
    config: GridConfig
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64).ravel()
        if v.size != self.config.size:
            raise ShapeError(
                f"tensor length {v.size} != S*S*(5B+C) = {self.config.size} for {self.config}"
            )
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @classmethod
    def zeros(cls, config: GridConfig) -> "DetectionTensor":
        return cls(config, np.zeros(config.size))

    def cells(self) -> np.ndarray:
        """Read-only (S, S, 5B+C) view."""
        c = self.config
        return self.values.reshape(c.S, c.S, c.cell_width)

    def boxes(self) -> np.ndarray:
        """Read-only (S, S, B, 5) view of the predictor five-tuples."""
        c = self.config
        return self.cells()[..., : 5 * c.B].reshape(c.S, c.S, c.B, 5)

    def class_probs(self) -> np.ndarray:
        return self.cells()[..., 5 * self.config.B :]

    def __eq__(self, other):
        if not isinstance(other, DetectionTensor):
            return NotImplemented
        return self.config == other.config and np.array_equal(self.values, other.values)

    def to_json(self) -> str:
        c = self.config
        return json.dumps({"s": c.S, "b": c.B, "c": c.C, "values": self.values.tolist()})

    @classmethod
    def from_json(cls, text: str) -> "DetectionTensor":
        d = json.loads(text)
        return cls(GridConfig(d["s"], d["b"], d["c"]), np.asarray(d["values"], dtype=np.float64))


@dataclass(frozen=True)
class GroundTruthObject:
    box: BoundingBox
    category: int

    def __post_init__(self):
        if not (self.box.x < 1.0 and self.box.y < 1.0):
            raise DomainError(f"object center ({self.box.x}, {self.box.y}) must lie in [0, 1)^2")
        if self.category < 0:
            raise ValueError(f"negative category {self.category}")


class CellPrediction(NamedTuple):
    row: int
    col: int
    boxes: list  # B BoundingBox instances, image-normalized
    confidences: np.ndarray  # (B,)
    class_probs: np.ndarray  # (C,)


def responsible_cell(box: BoundingBox, config: GridConfig) -> tuple[int, int]:
    if not (0.0 <= box.x < 1.0 and 0.0 <= box.y < 1.0):
        raise DomainError(f"box center ({box.x}, {box.y}) outside [0, 1)^2")
    return math.floor(box.y * config.S), math.floor(box.x * config.S)


def encode(objects: Sequence[GroundTruthObject], config: GridConfig = GridConfig()) -> DetectionTensor:
    """Build the training target for ``objects``.

    Each object is written into predictor slot 0 of its responsible cell with
    confidence 1 and a one-hot class vector. Two objects in one cell raise
    :class:`EncodingConflictError`.
    """
    S, B = config.S, config.B
    out = np.zeros((S, S, config.cell_width))
    taken = set()
    for obj in objects:
        if obj.category >= config.C:
            raise DomainError(f"category {obj.category} >= C={config.C}")
        row, col = responsible_cell(obj.box, config)
        if (row, col) in taken:
            raise EncodingConflictError((row, col))
        taken.add((row, col))
        b = obj.box
        out[row, col, 0:5] = (b.x * S - col, b.y * S - row, b.w, b.h, 1.0)
        out[row, col, 5 * B + obj.category] = 1.0
    return DetectionTensor(config, out)


def decode(tensor: DetectionTensor) -> list[CellPrediction]:
    """Map every cell back to image-normalized boxes, row-major order."""
    if not isinstance(tensor, DetectionTensor):
        raise ShapeError("decode expects a DetectionTensor")
    c = tensor.config
    S = c.S
    boxes = tensor.boxes()
    probs = tensor.class_probs()
    cells = []
    for row in range(S):
        for col in range(S):
            b = boxes[row, col]
            decoded = [
                BoundingBox((col + p[0]) / S, (row + p[1]) / S, p[2], p[3]) for p in b
            ]
            cells.append(CellPrediction(row, col, decoded, b[:, 4].copy(), probs[row, col].copy()))
    return cells
