"""A stroll through the theme park: areas split and merge as we pass.

Walks south from inside Harbor Gate Plaza, across the park center, into
Storybook Grove. The area we leave collapses back into its super label while
the one we approach splits into individual ride labels — both as animated
crossfades, which show up below as frames with mid-fade alphas.

Run:  python3 demos/walkthrough.py
"""

from arlabels.datasets import load_example
from arlabels.geo import DevicePose
from arlabels.pipeline import LabelEngine
from arlabels.scene import WorldPosition

FPS = 30.0
WALK = [
    (0.0, WorldPosition(3.0, 1.6, 289.0), "inside Harbor Gate Plaza"),
    (8.0, WorldPosition(2.0, 1.6, 0.0), "crossing the park center"),
    (16.0, WorldPosition(1.0, 1.6, -294.0), "arriving in Storybook Grove"),
    (19.0, WorldPosition(1.0, 1.6, -294.0), "standing still"),
]


def pose_at(t: float) -> DevicePose:
    for (t0, p0, _), (t1, p1, _) in zip(WALK, WALK[1:]):
        if t0 <= t <= t1:
            f = (t - t0) / (t1 - t0)
            return DevicePose(WorldPosition(
                p0.x + f * (p1.x - p0.x), p0.y, p0.z + f * (p1.z - p0.z)))
    return DevicePose(WALK[-1][1])


def describe(snap) -> str:
    supers = sum(1 for lab in snap.labels if lab.kind == "super")
    pois = sum(1 for lab in snap.labels if lab.kind == "poi")
    fading = sum(1 for lab in snap.labels
                 if any(0.0 < a < 1.0 for a in lab.alpha.values()))
    return (f"t={snap.timestamp:6.2f}s  supers={supers}  pois={pois:2d}  "
            f"mid-fade={fading:2d}  rays={snap.instrumentation.rays_cast:4d}  "
            f"shifts={snap.instrumentation.shift_ops:3d}")


def main() -> None:
    scene = load_example("theme-park")
    engine = LabelEngine(scene)
    print(f"scene: {scene.name} — {len(scene.pois)} POIs in {len(scene.groups)} groups")
    print(f"transitions: {scene.easing.value}, {scene.transition_duration_s}s\n")

    captions = iter(WALK)
    next_caption = next(captions)
    prev_counts = None
    frames = int(WALK[-1][0] * FPS) + 1
    for k in range(frames):
        t = k / FPS
        if next_caption and t >= next_caption[0]:
            print(f"-- {next_caption[2]} --")
            next_caption = next(captions, None)
        snap = engine.update_frame(pose_at(t), t)
        supers = sum(1 for lab in snap.labels if lab.kind == "super")
        pois = sum(1 for lab in snap.labels if lab.kind == "poi")
        if (supers, pois) != prev_counts:
            print(f"   {describe(snap)}   <- label set changed")
            prev_counts = (supers, pois)
        elif k % 60 == 0:
            print(f"   {describe(snap)}")

    settled = all(a in (0.0, 1.0) for lab in snap.labels for a in lab.alpha.values())
    print(f"\nsettled at rest: {settled} (every alpha exactly 0 or 1)")


if __name__ == "__main__":
    main()
