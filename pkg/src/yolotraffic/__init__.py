"""YOLO-style grid detector math and the traffic-scene detection benchmark."""

from .errors import DomainError, EncodingConflictError, ShapeError
from .geometry import BoundingBox, ScoredDetection, from_corner_form, iou, to_corner_form
from .gridcodec import DetectionTensor, GridConfig, GroundTruthObject, decode, encode, responsible_cell
from .loss import LossBreakdown, LossWeights, assign_responsible_predictor, loss_gradient, yolo_loss
from .postprocess import PostprocessConfig, class_confidence, detect, filter_by_score, nms

__version__ = "0.1.0"
