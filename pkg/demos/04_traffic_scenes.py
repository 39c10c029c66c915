# Projecting the experiment layouts through a pinhole camera.
from yolotraffic import iou
from yolotraffic.scenegen import DEFAULT_FOCAL_SCALE, SceneConfig, build_layout, car, person, project

print("focal scale:", round(DEFAULT_FOCAL_SCALE, 4))
for e in (1, 2, 3, 4):
    layout = build_layout(e)
    print(f"experiment {e}: {len(layout.trials)} placements, {layout.photo_count} photos")

# apparent size of a person vs a car as the camera backs off
for d in (10, 30, 60):
    s = SceneConfig(d)
    p, c = project(person("M"), s), project(car("M"), s)
    print(f"{d:2d} ft  person h={p.h:.3f} area={p.area:.5f}   car h={c.h:.3f} area={c.area:.5f}")

# same-lane pairs from experiment 3 overlap on screen
s = SceneConfig(40)
for lane in "LMR":
    v = iou(project(person(lane), s), project(car(lane), s))
    print(f"lane {lane}: person/car IOU at the baseline = {v:.3f}")
