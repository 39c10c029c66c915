"""
Slow independent reference computations used by the self-check and tests.

None of these share code paths with the functions they check beyond the
basic value types.
"""

from __future__ import annotations

import itertools
from typing import Callable, Sequence

import numpy as np

from .geometry import BoundingBox, ScoredDetection


def rasterized_iou(a: BoundingBox, b: BoundingBox, resolution: int = 1000) -> float:
    """IOU by counting pixel centers inside each box.

    Pixels have pitch ``1/resolution`` in image units; the grid spans both
    boxes even where they hang over the image border.
    """
    lo_x = np.floor(min(a.x - a.w / 2, b.x - b.w / 2) * resolution)
    hi_x = np.ceil(max(a.x + a.w / 2, b.x + b.w / 2) * resolution)
    lo_y = np.floor(min(a.y - a.h / 2, b.y - b.h / 2) * resolution)
    hi_y = np.ceil(max(a.y + a.h / 2, b.y + b.h / 2) * resolution)
    cx = (np.arange(lo_x, hi_x + 1) + 0.5) / resolution
    cy = (np.arange(lo_y, hi_y + 1) + 0.5) / resolution

    def mask(box):
        inside_x = (cx >= box.x - box.w / 2) & (cx <= box.x + box.w / 2)
        inside_y = (cy >= box.y - box.h / 2) & (cy <= box.y + box.h / 2)
        return inside_y[:, None] & inside_x[None, :]

    ma, mb = mask(a), mask(b)
    union = np.count_nonzero(ma | mb)
    return np.count_nonzero(ma & mb) / union if union else 0.0


def central_difference_gradient(f: Callable[[np.ndarray], float], x: np.ndarray, step: float = 1e-5) -> np.ndarray:
    x = np.array(x, dtype=np.float64)
    g = np.empty_like(x)
    for i in range(x.size):
        orig = x.flat[i]
        x.flat[i] = orig + step
        fp = f(x)
        x.flat[i] = orig - step
        fm = f(x)
        x.flat[i] = orig
        g.flat[i] = (fp - fm) / (2 * step)
    return g


def relative_error(analytic: np.ndarray, numeric: np.ndarray, floor: float = 1e-6) -> np.ndarray:
    """|a - n| / max(|a|, |n|, floor), elementwise."""
    a, n = np.asarray(analytic), np.asarray(numeric)
    return np.abs(a - n) / np.maximum(np.maximum(np.abs(a), np.abs(n)), floor)


def _pair_iou(a: BoundingBox, b: BoundingBox) -> float:
    # plain-python rectangle overlap, deliberately not geometry.iou
    ix = max(0.0, min(a.x + a.w / 2, b.x + b.w / 2) - max(a.x - a.w / 2, b.x - b.w / 2))
    iy = max(0.0, min(a.y + a.h / 2, b.y + b.h / 2) - max(a.y - a.h / 2, b.y - b.h / 2))
    inter = ix * iy
    union = a.w * a.h + b.w * b.h - inter
    return inter / union if union > 0 else 0.0


def brute_force_nms(detections: Sequence[ScoredDetection], iou_threshold: float) -> list[ScoredDetection]:
    """Greedy NMS by exhaustive subset search.

    Within a category, with priority (descending score, then input position),
    the greedy result is the unique subset K such that a detection is in K
    exactly when no higher-priority member of K overlaps it by more than the
    threshold. Every subset is tested against that condition.
    """
    n = len(detections)
    if n > 16:
        raise ValueError("brute force limited to 16 detections")
    prio = {i: (-detections[i].score, i) for i in range(n)}
    kept = []
    for cat in sorted({d.category for d in detections}):
        idx = [i for i in range(n) if detections[i].category == cat]
        overl = {
            (i, j): _pair_iou(detections[i].box, detections[j].box) > iou_threshold
            for i in idx for j in idx if i != j
        }
        solutions = []
        for r in range(len(idx) + 1):
            for subset in itertools.combinations(idx, r):
                s = set(subset)
                ok = all(
                    (i in s) == (not any(prio[k] < prio[i] and overl[(i, k)] for k in s))
                    for i in idx
                )
                if ok:
                    solutions.append(s)
        if len(solutions) != 1:
            raise AssertionError(f"greedy fixed point not unique for category {cat}: {solutions}")
        kept.extend(solutions[0])
    return [detections[i] for i in sorted(kept, key=lambda i: prio[i])]
