import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from yolotraffic.errors import DomainError, ShapeError
from yolotraffic.geometry import BoundingBox, iou
from yolotraffic.gridcodec import DetectionTensor, GridConfig, GroundTruthObject, encode
from yolotraffic.loss import (
    LossWeights,
    assign_responsible_predictor,
    compute_assignment,
    loss_gradient,
    yolo_loss,
)
from yolotraffic.selfcheck import gradient_max_error, random_loss_instance, random_objects


def reference_loss(pred, target, lc=5.0, ln=0.5, lo=1.0, lk=1.0):
    """Cell-by-cell scalar evaluation with its own overlap arithmetic."""
    cfg = pred.config
    S, B, C = cfg.S, cfg.B, cfg.C
    p = pred.values.tolist()
    t = target.values.tolist()
    W = 5 * B + C

    def overlap(a, b):
        ax0, ax1 = a[0] - a[2] / 2, a[0] + a[2] / 2
        ay0, ay1 = a[1] - a[3] / 2, a[1] + a[3] / 2
        bx0, bx1 = b[0] - b[2] / 2, b[0] + b[2] / 2
        by0, by1 = b[1] - b[3] / 2, b[1] + b[3] / 2
        inter = max(0, min(ax1, bx1) - max(ax0, bx0)) * max(0, min(ay1, by1) - max(ay0, by0))
        union = (ax1 - ax0) * (ay1 - ay0) + (bx1 - bx0) * (by1 - by0) - inter
        return inter / union if union > 0 else 0.0

    parts = [0.0] * 5
    for r in range(S):
        for c in range(S):
            base = (r * S + c) * W
            tp = t[base:base + 5]
            occupied = tp[4] == 1
            resp = -1
            if occupied:
                truth_img = [(c + tp[0]) / S, (r + tp[1]) / S, tp[2], tp[3]]
                best = -1.0
                for j in range(B):
                    q = p[base + 5 * j: base + 5 * j + 5]
                    v = overlap([(c + q[0]) / S, (r + q[1]) / S, q[2], q[3]], truth_img)
                    if v > best:
                        best, resp, best_iou = v, j, v
            for j in range(B):
                q = p[base + 5 * j: base + 5 * j + 5]
                if j == resp:
                    parts[0] += (tp[0] - q[0]) ** 2 + (tp[1] - q[1]) ** 2
                    parts[1] += (math.sqrt(tp[2]) - math.sqrt(q[2])) ** 2 + (math.sqrt(tp[3]) - math.sqrt(q[3])) ** 2
                    parts[2] += (best_iou - q[4]) ** 2
                else:
                    parts[3] += q[4] ** 2
            if occupied:
                for k in range(C):
                    parts[4] += (t[base + 5 * B + k] - p[base + 5 * B + k]) ** 2
    return [lc * parts[0], lc * parts[1], lo * parts[2], ln * parts[3], lk * parts[4]]


def single(values):
    return DetectionTensor(GridConfig(1, 1, 1), np.array(values, dtype=float))


def perfect_pair(seed=0, cfg=GridConfig(4, 2, 3)):
    rng = np.random.default_rng(seed)
    target = encode(random_objects(rng, cfg), cfg)
    return target, target


def parts(b):
    return [b.coord_xy, b.coord_wh, b.conf_obj, b.conf_noobj, b.classification]


def test_default_weights():
    w = LossWeights()
    assert (w.lambda_coord, w.lambda_noobj, w.lambda_obj, w.lambda_class) == (5, 0.5, 1, 1)
    with pytest.raises(ValueError):
        LossWeights(lambda_coord=-1)


def test_assign_responsible_predictor():
    truth = BoundingBox(0.5, 0.5, 0.4, 0.4)
    assert assign_responsible_predictor([BoundingBox(0.1, 0.1, 0.1, 0.1)], truth) == 0
    low = BoundingBox(0.3, 0.5, 0.4, 0.4)  # iou 1/3
    high = BoundingBox(0.5, 0.5, 0.36, 0.4)  # iou 0.9
    assert assign_responsible_predictor([low, high], truth) == 1
    assert assign_responsible_predictor([high, high], truth) == 0
    with pytest.raises(ValueError):
        assign_responsible_predictor([], truth)


def test_perfect_prediction_is_zero():
    pred, target = perfect_pair()
    b = yolo_loss(pred, target)
    assert b.total == 0.0 and parts(b) == [0.0] * 5
    g = loss_gradient(pred, target)
    assert not g.values.any()


def test_shifted_x_single_cell():
    truth = single([0.5, 0.5, 0.4, 0.4, 1, 1])
    pred = single([0.3, 0.5, 0.4, 0.4, 1, 1])
    b = yolo_loss(pred, truth)
    ref = reference_loss(pred, truth)
    # hand evaluation: 5 * 0.2^2; overlap 0.2*0.4 over union 0.24 -> iou 1/3
    assert b.coord_xy == pytest.approx(0.2, abs=1e-15)
    assert b.conf_obj == pytest.approx((1 / 3 - 1) ** 2, abs=1e-15)
    assert [b.coord_wh, b.conf_noobj, b.classification] == [0.0, 0.0, 0.0]
    assert parts(b) == pytest.approx(ref, abs=1e-15)


def test_empty_target_only_noobj(rng):
    cfg = GridConfig(3, 2, 2)
    vals = rng.uniform(0.1, 1, cfg.size)
    pred = DetectionTensor(cfg, vals)
    b = yolo_loss(pred, DetectionTensor.zeros(cfg))
    assert parts(b)[:3] + parts(b)[4:] == [0.0, 0.0, 0.0, 0.0]
    assert b.conf_noobj == pytest.approx(0.5 * np.sum(pred.boxes()[..., 4] ** 2), rel=1e-14)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_matches_reference_and_decomposes(seed):
    pred, target = random_loss_instance(np.random.default_rng(seed))
    b = yolo_loss(pred, target)
    assert parts(b) == pytest.approx(reference_loss(pred, target), rel=1e-12, abs=1e-14)
    assert abs(b.total - sum(parts(b))) <= 1e-12
    assert all(v >= 0 for v in parts(b))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.1, 10))
def test_lambda_coord_doubling(seed, lc):
    pred, target = random_loss_instance(np.random.default_rng(seed))
    w1 = LossWeights(lambda_coord=lc)
    w2 = dataclasses.replace(w1, lambda_coord=2 * lc)
    a, b = yolo_loss(pred, target, w1), yolo_loss(pred, target, w2)
    assert b.coord_xy + b.coord_wh == 2 * (a.coord_xy + a.coord_wh)
    assert (b.conf_obj, b.conf_noobj, b.classification) == (a.conf_obj, a.conf_noobj, a.classification)


def test_responsible_choice_invariant_to_iou_scaling(rng):
    truth = BoundingBox(0.5, 0.5, 0.4, 0.4)
    preds = [BoundingBox(*rng.uniform(0.2, 0.8, 4)) for _ in range(4)]
    ious = np.array([iou(p, truth) for p in preds])
    assert assign_responsible_predictor(preds, truth) == int(np.argmax(ious * 3.7))


def test_gradient_sparsity(rng):
    pred, target = random_loss_instance(rng)
    g = loss_gradient(pred, target)
    a = compute_assignment(pred, target)
    B = pred.config.B
    gb = g.boxes()
    resp = a.occupied[..., None] & (np.arange(B) == a.responsible[..., None])
    assert not gb[~resp][:, :4].any()
    assert not g.class_probs()[~a.occupied].any()


@pytest.mark.parametrize("seed", range(20))
def test_gradient_matches_finite_differences(seed):
    pred, target = random_loss_instance(np.random.default_rng(1000 + seed))
    assert gradient_max_error(pred, target) < 1e-4


def test_errors():
    truth = single([0.5, 0.5, 0.4, 0.4, 1, 1])
    with pytest.raises(ShapeError):
        yolo_loss(DetectionTensor.zeros(GridConfig(2, 1, 1)), truth)
    with pytest.raises(DomainError):
        yolo_loss(single([0.5, 0.5, -0.1, 0.4, 1, 1]), truth)
    with pytest.raises(DomainError):
        loss_gradient(single([0.5, 0.5, 0.0, 0.4, 1, 1]), truth)
    with pytest.raises(ValueError):
        yolo_loss(truth, single([0.5, 0.5, 0.4, 0.4, 0.7, 1]))
