# The five-part training loss on a random prediction and a finite-difference check of its gradient.
import numpy as np

from yolotraffic import LossWeights, loss_gradient, yolo_loss
from yolotraffic.loss import compute_assignment
from yolotraffic.selfcheck import gradient_max_error, random_loss_instance

rng = np.random.default_rng(3)
pred, target = random_loss_instance(rng)
print("grid:", pred.config)

parts = yolo_loss(pred, target)
for name in ("coord_xy", "coord_wh", "conf_obj", "conf_noobj", "classification", "total"):
    print(f"  {name:15s} {getattr(parts, name):.6f}")

# which predictor answers for each occupied cell, and the IOU it must predict
a = compute_assignment(pred, target)
for r, c in zip(*np.nonzero(a.occupied)):
    print(f"  cell ({r},{c}): predictor {a.responsible[r, c]}, confidence target {a.iou_target[r, c]:.3f}")

# heavier coordinate weight only touches the coordinate terms
heavy = yolo_loss(pred, target, LossWeights(lambda_coord=10))
print("coord terms x2:", heavy.coord_xy + heavy.coord_wh, "vs", 2 * (parts.coord_xy + parts.coord_wh))

g = loss_gradient(pred, target)
print("gradient norm:", np.linalg.norm(g.values))
print("max relative error vs central differences:", gradient_max_error(pred, target))
