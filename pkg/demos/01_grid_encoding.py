# Encoding ground truth into a 7x7x30 grid tensor and reading it back.
import numpy as np

from yolotraffic import BoundingBox, GridConfig, GroundTruthObject, decode, encode, responsible_cell

cfg = GridConfig()  # S=7 cells per side, B=2 boxes per cell, C=20 classes
print("per-cell width:", cfg.cell_width, "tensor length:", cfg.size)

# a car (class 6) left of center and a person (class 14) lower right
objects = [
    GroundTruthObject(BoundingBox(0.30, 0.55, 0.25, 0.12), 6),
    GroundTruthObject(BoundingBox(0.72, 0.60, 0.05, 0.20), 14),
]
for o in objects:
    print("object", o.category, "-> cell", responsible_cell(o.box, cfg))

target = encode(objects, cfg)
cells = target.cells()
print("car cell vector:", np.round(cells[3, 2], 3))  # offsets, size, confidence 1, one-hot class

# decode puts offsets back into image coordinates
for c in decode(target):
    if c.confidences[0] == 1:
        print((c.row, c.col), c.boxes[0], "class", int(np.argmax(c.class_probs)))

# two centers in one cell is an error, not a silent overwrite
try:
    encode([objects[0], GroundTruthObject(BoundingBox(0.31, 0.56, 0.1, 0.1), 1)], cfg)
except ValueError as exc:
    print("conflict:", exc)
