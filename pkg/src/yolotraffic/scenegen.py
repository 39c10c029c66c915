"""
Experiment geometries and pinhole projection of persons and cars.

World units are feet. Lanes sit ``lane_spacing_ft`` apart laterally, Middle
on the camera axis. ``offset_ft`` is measured from the baseline toward the
camera, so an object at offset 20 is 20 ft closer than the baseline.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from enum import Enum

from .errors import DomainError
from .geometry import BoundingBox, from_corner_form, iou


class Lane(str, Enum):
    LEFT = "L"
    MIDDLE = "M"
    RIGHT = "R"

    @property
    def lateral(self) -> int:
        return {"L": -1, "M": 0, "R": 1}[self.value]


LANES = (Lane.LEFT, Lane.MIDDLE, Lane.RIGHT)
MATRIX_OFFSETS_FT = (0, 10, 20)
EXPERIMENT_DISTANCES_FT = {
    1: (10, 20, 30, 40, 50, 60),
    2: (10, 20, 30, 40, 50, 60),
    3: (40, 50, 60),
    4: (40, 50, 60),
}
PHOTOS_PER_TRIAL = 3


@dataclass(frozen=True)
class ObjectSizes:
    """Physical extents; cars are seen broadside so their length is the projected width."""

    person_width_ft: float = 1.8
    person_height_ft: float = 5.7
    car_length_ft: float = 15.0
    car_height_ft: float = 4.8


@dataclass(frozen=True)
class SceneObject:
    kind: str  # "person" | "car"
    lane: Lane
    offset_ft: float
    world_width_ft: float
    world_height_ft: float

    def __post_init__(self):
        if self.kind not in ("person", "car"):
            raise ValueError(f"unknown object kind {self.kind!r}")
        if self.world_width_ft <= 0 or self.world_height_ft <= 0:
            raise ValueError("world extents must be positive")
        object.__setattr__(self, "lane", Lane(self.lane))


def person(lane, offset_ft: float = 0, sizes: ObjectSizes = ObjectSizes()) -> SceneObject:
    return SceneObject("person", Lane(lane), offset_ft, sizes.person_width_ft, sizes.person_height_ft)


def car(lane, offset_ft: float = 0, sizes: ObjectSizes = ObjectSizes()) -> SceneObject:
    return SceneObject("car", Lane(lane), offset_ft, sizes.car_length_ft, sizes.car_height_ft)


@dataclass(frozen=True)
class Trial:
    camera_distance_ft: float
    objects: tuple[SceneObject, ...]

    def find(self, kind: str) -> SceneObject | None:
        for o in self.objects:
            if o.kind == kind:
                return o
        return None


@dataclass(frozen=True)
class ExperimentLayout:
    experiment_id: int
    trials: tuple[Trial, ...]

    @property
    def photo_count(self) -> int:
        return PHOTOS_PER_TRIAL * len(self.trials)

    def at_distance(self, distance_ft: float) -> list[Trial]:
        return [t for t in self.trials if t.camera_distance_ft == distance_ft]


def build_layout(experiment_id: int, sizes: ObjectSizes = ObjectSizes()) -> ExperimentLayout:
    """Enumerate one experiment's placements.

    Order: distance, then the baseline object's lane, then the matrix object
    row-major (offset, then lane).
    """
    if experiment_id not in EXPERIMENT_DISTANCES_FT:
        raise ValueError(f"unknown experiment id {experiment_id!r}; expected 1..4")
    trials = []
    for d in EXPERIMENT_DISTANCES_FT[experiment_id]:
        if experiment_id == 1:
            # the two outer positions were not shot at 10 ft
            lanes = (Lane.MIDDLE,) if d == 10 else LANES
            trials += [Trial(d, (person(l, 0, sizes),)) for l in lanes]
        elif experiment_id == 2:
            trials += [Trial(d, (car(l, 0, sizes),)) for l in LANES]
        elif experiment_id == 3:
            for cl in LANES:
                for off in MATRIX_OFFSETS_FT:
                    for pl in LANES:
                        trials.append(Trial(d, (car(cl, 0, sizes), person(pl, off, sizes))))
        else:
            for pl in LANES:
                for off in MATRIX_OFFSETS_FT:
                    for cl in LANES:
                        if cl == pl:
                            continue  # a car in the person's lane hides the person
                        trials.append(Trial(d, (car(cl, off, sizes), person(pl, 0, sizes))))
    return ExperimentLayout(experiment_id, tuple(trials))


def fit_focal_scale(
    image_aspect: float = 4 / 3,
    lane_spacing_ft: float = 10.0,
    sizes: ObjectSizes = ObjectSizes(),
    margin: float = 0.95,
) -> float:
    """Largest focal scale (times ``margin``) keeping every experiment placement fully in frame."""
    best = float("inf")
    for eid in EXPERIMENT_DISTANCES_FT:
        for t in build_layout(eid, sizes).trials:
            for o in t.objects:
                d = t.camera_distance_ft - o.offset_ft
                half_extent = abs(o.lane.lateral) * lane_spacing_ft + o.world_width_ft / 2
                best = min(best, 0.5 * d * image_aspect / half_extent, d / o.world_height_ft)
    return margin * best


DEFAULT_ASPECT = 4 / 3
DEFAULT_FOCAL_SCALE = fit_focal_scale(DEFAULT_ASPECT)


@dataclass(frozen=True)
class SceneConfig:
    camera_distance_ft: float
    focal_scale: float = DEFAULT_FOCAL_SCALE
    image_aspect: float = DEFAULT_ASPECT
    lane_spacing_ft: float = 10.0

    def __post_init__(self):
        if self.camera_distance_ft <= 0 or self.focal_scale <= 0 or self.image_aspect <= 0:
            raise ValueError("camera distance, focal scale and aspect must be positive")

    def at(self, camera_distance_ft: float) -> "SceneConfig":
        return dataclasses.replace(self, camera_distance_ft=camera_distance_ft)


def project(obj: SceneObject, scene: SceneConfig) -> BoundingBox:
    """Pinhole projection to a normalized box, clipped to the image.

    The camera axis passes through the image center and the vertical middle
    of every object.
    """
    d = scene.camera_distance_ft - obj.offset_ft
    if d <= 0:
        raise DomainError(f"object at {d} ft from camera is not in front of it")
    f, a = scene.focal_scale, scene.image_aspect
    w = f * obj.world_width_ft / (d * a)
    h = f * obj.world_height_ft / d
    x = 0.5 + f * obj.lane.lateral * scene.lane_spacing_ft / (d * a)
    y = 0.5

    def clip(v):
        return min(max(v, 0.0), 1.0)

    return from_corner_form(clip(x - w / 2), clip(y - h / 2), clip(x + w / 2), clip(y + h / 2))


def overlap_flag(a: SceneObject, b: SceneObject, scene: SceneConfig) -> bool:
    return iou(project(a, scene), project(b, scene)) > 0
