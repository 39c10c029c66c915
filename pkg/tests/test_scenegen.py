import pytest
from hypothesis import given, strategies as st

from yolotraffic.errors import DomainError
from yolotraffic.geometry import iou
from yolotraffic.scenegen import (
    DEFAULT_FOCAL_SCALE,
    LANES,
    Lane,
    SceneConfig,
    build_layout,
    car,
    overlap_flag,
    person,
    project,
)


def test_inverse_distance_scaling():
    p = person("L")
    near = project(p, SceneConfig(20))
    far = project(p, SceneConfig(40))
    assert far.h == pytest.approx(near.h / 2, rel=1e-15)


def test_middle_lane_is_centered():
    for d in (10, 30, 60):
        assert project(person("M"), SceneConfig(d)).x == 0.5
        assert project(car("M"), SceneConfig(d)).x == 0.5


def test_car_bigger_than_person_at_60():
    s = SceneConfig(60)
    assert project(car("M"), s).area > project(person("M"), s).area


@given(st.sampled_from(LANES), st.floats(10, 200), st.floats(0.01, 100))
def test_monotone_shrinkage(lane, d, extra):
    # holds while the object is in frame; clipping can shrink a near box to nothing
    p = car(lane)
    assert project(p, SceneConfig(d + extra)).area < project(p, SceneConfig(d)).area


def test_behind_camera():
    with pytest.raises(DomainError):
        project(person("M", 20), SceneConfig(20))


def test_clipping_keeps_box_valid():
    b = project(car("L"), SceneConfig(5, focal_scale=3.0))
    assert b.x - b.w / 2 >= 0.0


@pytest.mark.parametrize("eid, n", [(1, 16), (2, 18), (3, 81), (4, 54)])
def test_layout_cardinality(eid, n):
    assert len(build_layout(eid).trials) == n


def test_photo_total():
    assert sum(build_layout(e).photo_count for e in (1, 2, 3, 4)) == 507


def test_unknown_experiment():
    with pytest.raises(ValueError):
        build_layout(5)


def test_layout_order_experiment_3():
    t = build_layout(3).trials
    assert t[0].camera_distance_ft == 40 and t[-1].camera_distance_ft == 60
    assert [(o.kind, o.lane, o.offset_ft) for o in t[1].objects] == [("car", Lane.LEFT, 0), ("person", Lane.MIDDLE, 0)]
    assert [(o.kind, o.lane, o.offset_ft) for o in t[3].objects][1] == ("person", Lane.LEFT, 10)


def test_experiment_4_excludes_blocking_positions():
    for t in build_layout(4).trials:
        assert t.find("car").lane != t.find("person").lane
        assert t.find("person").offset_ft == 0
    per_lane = [sum(1 for t in build_layout(4).at_distance(40) if t.find("person").lane == l) for l in LANES]
    assert per_lane == [6, 6, 6]


def test_all_placements_in_frame_with_default_focal_scale():
    for e in (1, 2, 3, 4):
        for t in build_layout(e).trials:
            for o in t.objects:
                b = project(o, SceneConfig(t.camera_distance_ft))
                assert b.w > 0 and b.h > 0
                assert b.x - b.w / 2 > 0 and b.x + b.w / 2 < 1


def test_overlap_flag():
    s = SceneConfig(40)
    assert overlap_flag(person("L", 10), car("L"), s)
    assert not overlap_flag(person("L"), car("R"), s)
    assert iou(project(person("L"), s), project(car("R"), s)) == 0.0
    p = person("R", 20)
    assert overlap_flag(p, p, s)


def test_default_focal_scale_positive():
    assert 0 < DEFAULT_FOCAL_SCALE < 1
