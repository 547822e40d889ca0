import json
import math
import random

import pytest

from arlabels.geo import DevicePose, GeoCoordinate
from arlabels.layouts import gen_grid, gen_line
from arlabels.datasets import load_example
from arlabels.pipeline import (
    ConfigError,
    LabelEngine,
    STAGES,
    project_to_screen,
    snapshot_to_dict,
    snapshot_to_json_line,
)
from arlabels.scene import (
    Extent,
    LabelGroup,
    LodLevel,
    POI,
    Scene,
    WorldPosition,
)

SMALL_EXTENTS = {
    LodLevel.LOWEST: Extent(2.0, 2.0),
    LodLevel.MIDDLE: Extent(3.0, 3.0),
    LodLevel.HIGHEST: Extent(4.0, 4.0),
}


def _pose(x=0.0, z=0.0, yaw=0.0, pitch=0.0, y=1.6):
    return DevicePose(position=WorldPosition(x, y, z), yaw_deg=yaw, pitch_deg=pitch)


def _poi(pid, x, z, **kw):
    return POI(id=pid, name=pid.title(), position=WorldPosition(x, 0.0, z), **kw)


def _pair_scene():
    return Scene(
        pois=(_poi("near", 0.0, -20.0), _poi("far", 0.0, -40.0)),
        label_extents=dict(SMALL_EXTENTS),
    )


def _grouped_scene():
    pois = (
        _poi("a1", 0.0, 0.0, group_id="A", scalar_value=10.0),
        _poi("a2", 2.0, 0.0, group_id="A", scalar_value=20.0),
        _poi("a3", 4.0, 6.0, group_id="A", scalar_value=60.0),
        _poi("b1", 500.0, 0.0, group_id="B", scalar_value=5.0),
    )
    groups = (LabelGroup("A", "Cluster A", ("a1", "a2", "a3")), LabelGroup("B", "Cluster B", ("b1",)))
    return Scene(pois=pois, groups=groups, label_extents=dict(SMALL_EXTENTS))


def _comparable(snap):
    doc = snapshot_to_dict(snap)
    del doc["frame"]
    del doc["timestamp"]
    del doc["instrumentation"]["stage_us"]
    return doc


def _label(snap, kind, lid):
    for lab in snap.labels:
        if lab.kind == kind and lab.id == lid:
            return lab
    raise AssertionError(f"{kind} {lid} not in snapshot")


# -- steady state -----------------------------------------------------------


def test_static_pose_is_a_fixed_point_from_frame_zero():
    engine = LabelEngine(_pair_scene())
    pose = _pose()
    first = engine.update_frame(pose, 0.0)
    later = [engine.update_frame(pose, t) for t in (0.25, 1.0, 7.5)]
    for snap in later:
        assert _comparable(snap) == _comparable(first)
    assert [s.frame for s in [first, *later]] == [0, 1, 2, 3]


def test_first_frame_starts_settled_at_full_opacity():
    engine = LabelEngine(_pair_scene())
    snap = engine.update_frame(_pose(), 0.0)
    for lab in snap.labels:
        active = {e for e, a in lab.alpha.items() if a == 1.0}
        inactive = {e for e, a in lab.alpha.items() if a == 0.0}
        assert active | inactive == set(lab.alpha)
        assert len(active) >= 2  # rectangle and icon at least


def test_timestamps_must_not_decrease():
    engine = LabelEngine(_pair_scene())
    engine.update_frame(_pose(), 1.0)
    with pytest.raises(ValueError):
        engine.update_frame(_pose(), 0.5)
    with pytest.raises(ValueError):
        engine.update_frame(_pose(), math.nan)


def test_equal_timestamps_are_allowed():
    engine = LabelEngine(_pair_scene())
    a = engine.update_frame(_pose(), 1.0)
    b = engine.update_frame(_pose(), 1.0)
    assert _comparable(a) == _comparable(b)


# -- detail switches fade elements -------------------------------------------


def test_lod_drop_fades_text_out_over_the_transition():
    engine = LabelEngine(_pair_scene())
    pose = _pose()
    snap0 = engine.update_frame(pose, 0.0)
    assert _label(snap0, "poi", "far").lod == LodLevel.HIGHEST
    assert _label(snap0, "poi", "far").alpha["text"] == 1.0

    # tighter crowding limits demote the rear label to middle detail
    engine.apply_config({"thresholds": {"t_deg": 45.0, "m1_deg": 10.0, "m2_deg": 15.0}})

    at_switch = engine.update_frame(pose, 10.0)
    far = _label(at_switch, "poi", "far")
    assert far.lod == LodLevel.MIDDLE
    assert far.extent == SMALL_EXTENTS[LodLevel.MIDDLE]
    assert far.alpha["text"] == 1.0  # the fade starts here

    halfway = _label(engine.update_frame(pose, 10.5), "poi", "far")
    assert halfway.alpha["text"] == pytest.approx(0.5)

    done = _label(engine.update_frame(pose, 11.0), "poi", "far")
    assert done.alpha["text"] == 0.0
    assert done.alpha["rectangle"] == 1.0
    near = _label(engine.update_frame(pose, 11.1), "poi", "near")
    assert near.lod == LodLevel.HIGHEST  # the front label keeps full detail


# -- aggregation transitions ---------------------------------------------------


def test_collapse_crossfades_members_into_super():
    engine = LabelEngine(_grouped_scene())
    inside = _pose(x=2.0, z=2.0)
    snap0 = engine.update_frame(inside, 0.0)
    kinds0 = {(lab.kind, lab.id) for lab in snap0.labels}
    assert ("poi", "a1") in kinds0 and ("super", "A") not in kinds0

    far = _pose(x=500.0, z=0.0)
    engine.update_frame(far, 5.0)
    mid = engine.update_frame(far, 5.5)
    sup = _label(mid, "super", "A")
    member = _label(mid, "poi", "a1")
    assert 0.0 < sup.alpha["rectangle"] < 1.0
    assert 0.0 < member.alpha["rectangle"] < 1.0
    assert sup.alpha["rectangle"] == pytest.approx(1.0 - member.alpha["rectangle"])

    settled = engine.update_frame(far, 7.0)
    kinds = {(lab.kind, lab.id) for lab in settled.labels}
    assert ("super", "A") in kinds
    assert not any(k == ("poi", mid_id) for k, mid_id in kinds if k == "poi" and mid_id in {"a1", "a2", "a3"})
    sup = _label(settled, "super", "A")
    assert sup.alpha["rectangle"] == 1.0
    assert sup.aggregate_value == pytest.approx(30.0)
    assert sup.member_ids == ("a1", "a2", "a3")
    assert [e.name for e in sup.legend] == ["A1", "A2", "A3"]


def test_split_members_emerge_from_the_super_position():
    engine = LabelEngine(_grouped_scene())
    far = _pose(x=495.0, z=0.0)
    snap0 = engine.update_frame(far, 0.0)
    super_pos = _label(snap0, "super", "A").position

    inside = _pose(x=2.0, z=2.0)
    at_split = engine.update_frame(inside, 4.0)
    for mid_id in ("a1", "a2", "a3"):
        member = _label(at_split, "poi", mid_id)
        assert member.position == super_pos
        assert member.alpha["rectangle"] == 0.0  # fade-in starts here
    fading_super = _label(at_split, "super", "A")
    assert fading_super.alpha["rectangle"] == 1.0  # fade-out starts here

    halfway = engine.update_frame(inside, 4.5)
    assert 0.0 < _label(halfway, "poi", "a1").alpha["rectangle"] < 1.0

    settled = engine.update_frame(inside, 6.0)
    kinds = {(lab.kind, lab.id) for lab in settled.labels}
    assert ("super", "A") not in kinds
    scene = engine.scene
    for poi in scene.pois:
        if poi.group_id != "A":
            continue
        lab = _label(settled, "poi", poi.id)
        assert (lab.position.x, lab.position.z) == (poi.position.x, poi.position.z)
        assert lab.alpha["rectangle"] == 1.0


# -- configuration ---------------------------------------------------------------


def test_config_rejects_unknown_keys_untouched():
    engine = LabelEngine(_pair_scene())
    before = engine.scene
    with pytest.raises(ConfigError):
        engine.apply_config({"thresholds": {"t_deg": 40, "m1_deg": 5, "m2_deg": 10}, "bogus": 1})
    assert engine.scene == before


def test_config_is_atomic_on_partial_failure():
    engine = LabelEngine(_pair_scene())
    before = engine.scene
    with pytest.raises(ConfigError):
        engine.apply_config({"easing": "quad-in-out", "transition_duration_s": -3.0})
    assert engine.scene == before
    assert engine.scene.easing == before.easing


def test_config_validates_threshold_ordering():
    engine = LabelEngine(_pair_scene())
    with pytest.raises(ConfigError):
        engine.apply_config({"thresholds": {"t_deg": 45.0, "m1_deg": 30.0, "m2_deg": 20.0}})
    with pytest.raises(ConfigError):
        engine.apply_config({"thresholds": {"t_deg": 10.0, "m1_deg": 20.0, "m2_deg": 30.0}})


def test_config_applies_scalars_and_duration():
    engine = LabelEngine(_pair_scene())
    engine.apply_config({"scalars": {"near": 120.0}, "transition_duration_s": 0.25})
    assert engine.scene.transition_duration_s == 0.25
    snap = engine.update_frame(_pose(), 0.0)
    near = _label(snap, "poi", "near")
    assert near.scalar_value == 120.0
    assert near.color == "#FF0000"  # top of the default white-to-red scale


def test_config_rejects_unknown_poi_scalar():
    engine = LabelEngine(_pair_scene())
    with pytest.raises(ConfigError):
        engine.apply_config({"scalars": {"nobody": 3.0}})


def test_engine_rejects_invalid_scene():
    bad = Scene(pois=(_poi("dup", 0, -1), _poi("dup", 0, -2)))
    with pytest.raises(ValueError):
        LabelEngine(bad)


# -- snapshot serialization ------------------------------------------------------


def test_snapshot_dict_shape():
    engine = LabelEngine(_grouped_scene())
    snap = engine.update_frame(_pose(x=500.0, z=0.0), 0.0)
    doc = snapshot_to_dict(snap)
    assert set(doc) == {"schema", "frame", "timestamp", "device", "labels", "instrumentation"}
    assert doc["schema"] == 1
    assert set(doc["device"]) == {"position", "yaw_deg", "pitch_deg"}
    assert set(doc["instrumentation"]) == {"rays_cast", "shifts", "labels_shifted", "stage_us"}
    assert set(doc["instrumentation"]["stage_us"]) == set(STAGES)

    base_keys = {
        "kind", "name", "position", "normal", "lod", "alpha", "color",
        "extent", "category", "image_ref", "scalar_value", "scalar_unit",
    }
    for rec in doc["labels"]:
        if rec["kind"] == "poi":
            assert set(rec) == base_keys | {"poi_id"}
        else:
            assert rec["kind"] == "super"
            assert set(rec) == base_keys | {"group_id", "aggregate_value", "legend", "member_ids"}
            for entry in rec["legend"]:
                assert set(entry) == {"name", "value", "color"}
        assert rec["lod"] in {"Lowest", "Middle", "Highest"}
        assert set(rec["position"]) == {"x", "y", "z"}
        assert set(rec["alpha"]) == {"rectangle", "icon", "image", "text"}


def test_snapshot_json_line_round_trips():
    engine = LabelEngine(_pair_scene())
    snap = engine.update_frame(_pose(), 0.0)
    line = snapshot_to_json_line(snap)
    assert "\n" not in line
    assert json.loads(line) == snapshot_to_dict(snap)


def test_instrumentation_counts_follow_the_line_law():
    scene = gen_line(5)
    engine = LabelEngine(scene)
    snap = engine.update_frame(DevicePose(position=WorldPosition(0.0, 0.0, 0.0)), 0.0)
    inst = snap.instrumentation
    assert inst.shift_ops == 10  # 5*4/2
    assert inst.rays_cast == 4 * 4 + 4 * inst.shift_ops
    assert inst.labels_shifted == 4
    assert all(inst.stage_us[name] >= 0 for name in STAGES)


# -- determinism and invariance ---------------------------------------------------


def test_identical_runs_produce_identical_snapshots():
    scene = gen_grid(12)
    rng = random.Random(7)
    poses = [
        DevicePose(
            position=WorldPosition(rng.uniform(-5, 5), 1.6, rng.uniform(-5, 5)),
            yaw_deg=rng.uniform(0, 360),
        )
        for _ in range(6)
    ]
    times = sorted(rng.uniform(0, 10) for _ in range(6))
    runs = []
    for _ in range(2):
        engine = LabelEngine(scene)
        runs.append([_comparable(engine.update_frame(p, t)) for p, t in zip(poses, times)])
    assert runs[0] == runs[1]


def test_world_content_ignores_device_orientation():
    scene = gen_grid(9)
    base = LabelEngine(scene).update_frame(_pose(x=1.0, z=2.0), 0.0)
    for yaw, pitch in ((90.0, 0.0), (271.5, -45.0), (13.0, 60.0)):
        snap = LabelEngine(scene).update_frame(_pose(x=1.0, z=2.0, yaw=yaw, pitch=pitch), 0.0)
        assert snap.labels == base.labels


# -- geographic poses --------------------------------------------------------------


def test_geo_pose_is_localized_and_keeps_height():
    scene = load_example("local-shops")
    origin = scene.geo_origin
    pose = DevicePose(
        position=WorldPosition(0.0, 1.7, 0.0),
        geo=GeoCoordinate(origin.lat_deg, origin.lon_deg),
    )
    snap = LabelEngine(scene).update_frame(pose, 0.0)
    assert snap.device.position.x == pytest.approx(0.0, abs=1e-9)
    assert snap.device.position.z == pytest.approx(0.0, abs=1e-9)
    assert snap.device.position.y == 1.7
    assert snap.labels  # the shops are in view range of the maths regardless


def test_geo_pose_moves_the_device_north():
    scene = load_example("local-shops")
    origin = scene.geo_origin
    pose = DevicePose(
        position=WorldPosition(0.0, 1.6, 0.0),
        geo=GeoCoordinate(origin.lat_deg + 0.001, origin.lon_deg),
    )
    snap = LabelEngine(scene).update_frame(pose, 0.0)
    assert snap.device.position.z == pytest.approx(-111.19492664, abs=1e-6)


# -- screen projection ---------------------------------------------------------------


def _single_label_snapshot(distance):
    scene = Scene(pois=(_poi("one", 0.0, -distance),), label_extents=dict(SMALL_EXTENTS))
    engine = LabelEngine(scene)
    return engine.update_frame(DevicePose(position=WorldPosition(0.0, 0.0, 0.0)), 0.0)


def test_projection_centers_a_dead_ahead_label():
    snap = _single_label_snapshot(10.0)
    (lab,) = project_to_screen(snap, viewport=(1280, 720))
    assert not lab.off_screen
    assert (lab.x0 + lab.x1) / 2.0 == pytest.approx(640.0)
    assert lab.y1 == pytest.approx(360.0)  # bottom edge sits at eye height
    assert lab.depth == pytest.approx(10.0)


def test_projection_halves_height_at_double_distance():
    near = project_to_screen(_single_label_snapshot(10.0))[0]
    far = project_to_screen(_single_label_snapshot(20.0))[0]
    assert (near.y1 - near.y0) == pytest.approx(2.0 * (far.y1 - far.y0), rel=1e-9)


def test_projection_flags_labels_behind_the_camera():
    snap = _single_label_snapshot(10.0)
    camera = DevicePose(position=WorldPosition(0.0, 0.0, 0.0), yaw_deg=180.0)
    (lab,) = project_to_screen(snap, camera)
    assert lab.off_screen
    assert lab.depth < 0


def test_projection_flags_far_off_axis_labels():
    snap = _single_label_snapshot(10.0)
    camera = DevicePose(position=WorldPosition(0.0, 0.0, 0.0), yaw_deg=80.0)
    (lab,) = project_to_screen(snap, camera)
    assert lab.off_screen
