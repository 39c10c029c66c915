# Class-specific scores, thresholding and per-class non-max suppression.
from yolotraffic import BoundingBox, PostprocessConfig, ScoredDetection, class_confidence, filter_by_score, nms
from yolotraffic.oracles import brute_force_nms

print(class_confidence([0.8, 0.2], 0.5))  # Pr(class|object) * confidence

dets = [
    ScoredDetection(BoundingBox(0.50, 0.50, 0.30, 0.30), 0, 0.90),
    ScoredDetection(BoundingBox(0.52, 0.50, 0.30, 0.30), 0, 0.75),  # near-duplicate, same class
    ScoredDetection(BoundingBox(0.52, 0.50, 0.30, 0.30), 1, 0.60),  # same place, other class
    ScoredDetection(BoundingBox(0.10, 0.10, 0.10, 0.10), 0, 0.15),  # below threshold
]
cfg = PostprocessConfig()
kept = nms(filter_by_score(dets, cfg.score_threshold), cfg.nms_iou_threshold)
for d in kept:
    print(d.category, d.score, d.box)

assert kept == brute_force_nms(filter_by_score(dets, cfg.score_threshold), cfg.nms_iou_threshold)
print("matches the subset-enumeration oracle")
