import json
import math

import pytest

from arlabels.easing import EasingKind
from arlabels.scene import (
    DEFAULT_EXTENTS,
    ColorScale,
    Extent,
    GeoCoordinate,
    LabelGroup,
    LodLevel,
    LodThresholds,
    POI,
    Scene,
    SceneFormatError,
    WorldPosition,
    hex_to_rgb,
    load_scene,
    rgb_to_hex,
    save_scene,
    scalar_to_color,
    scene_from_json,
    scene_to_json,
    validate_scene,
)


def _poi(pid, x=0.0, z=-10.0, **kw):
    return POI(id=pid, name=pid, position=WorldPosition(x, 0.0, z), **kw)


def _scene(pois, **kw):
    return Scene(pois=tuple(pois), **kw)


def test_minimal_scene_validates_clean():
    scene = _scene([_poi("a"), _poi("b", x=5.0)])
    assert validate_scene(scene) == []


def test_duplicate_poi_id_flagged():
    scene = _scene([_poi("a"), _poi("a", x=5.0)])
    assert any("duplicate" in p for p in validate_scene(scene))


def test_non_finite_position_flagged():
    scene = _scene([POI(id="a", name="a", position=WorldPosition(math.nan, 0.0, 0.0))])
    assert any("non-finite" in p for p in validate_scene(scene))


def test_geodetic_poi_requires_scene_origin():
    poi = POI(id="a", name="a", position=GeoCoordinate(47.0, 8.0))
    assert any("geo_origin" in p for p in validate_scene(_scene([poi])))
    ok = _scene([poi], geo_origin=GeoCoordinate(47.0, 8.0))
    assert validate_scene(ok) == []


def test_geodetic_range_checked():
    poi = POI(id="a", name="a", position=GeoCoordinate(91.0, 0.0))
    scene = _scene([poi], geo_origin=GeoCoordinate(47.0, 8.0))
    assert any("out of range" in p for p in validate_scene(scene))


def test_group_membership_must_be_disjoint():
    pois = [
        _poi("a", group_id="g1"),
        _poi("b", x=3.0, group_id="g1"),
    ]
    groups = (
        LabelGroup("g1", "G1", ("a", "b")),
        LabelGroup("g2", "G2", ("b",)),
    )
    problems = validate_scene(Scene(pois=tuple(pois), groups=groups))
    assert any("already in group" in p for p in problems)


def test_group_unknown_member_flagged():
    scene = Scene(pois=(_poi("a", group_id="g1"),), groups=(LabelGroup("g1", "G1", ("a", "ghost")),))
    assert any("unknown member" in p for p in validate_scene(scene))


def test_poi_group_backreference_must_match():
    scene = Scene(pois=(_poi("a"),), groups=(LabelGroup("g1", "G1", ("a",)),))
    # poi.group_id is None but the group claims it
    assert any("does not match" in p for p in validate_scene(scene))


def test_threshold_ordering_enforced():
    bad = _scene([_poi("a")], thresholds=LodThresholds(t_deg=45.0, m1_deg=30.0, m2_deg=20.0))
    assert any("thresholds" in p for p in validate_scene(bad))
    also_bad = _scene([_poi("a")], thresholds=LodThresholds(t_deg=25.0, m1_deg=20.0, m2_deg=30.0))
    assert any("thresholds" in p for p in validate_scene(also_bad))


def test_extents_must_not_shrink_with_detail():
    extents = dict(DEFAULT_EXTENTS)
    extents[LodLevel.HIGHEST] = Extent(10.0, 10.0)  # smaller than Middle
    scene = _scene([_poi("a")], label_extents=extents)
    assert any("shrink" in p for p in validate_scene(scene))


def test_color_scale_needs_two_ascending_stops():
    one = _scene([_poi("a")], color_scale=ColorScale(stops=((0.0, (255.0, 255.0, 255.0)),)))
    assert any("two stops" in p for p in validate_scene(one))
    descending = _scene(
        [_poi("a")],
        color_scale=ColorScale(stops=((1.0, (0.0, 0.0, 0.0)), (0.0, (255.0, 255.0, 255.0)))),
    )
    assert any("ascending" in p for p in validate_scene(descending))


def test_scalar_to_color_interpolates_and_clamps():
    scale = ColorScale(stops=((0.0, (255.0, 255.0, 255.0)), (120.0, (255.0, 0.0, 0.0))))
    assert scalar_to_color(scale, 0.0) == (255.0, 255.0, 255.0)
    assert scalar_to_color(scale, 120.0) == (255.0, 0.0, 0.0)
    assert scalar_to_color(scale, 60.0) == (255.0, 127.5, 127.5)
    assert scalar_to_color(scale, -5.0) == (255.0, 255.0, 255.0)  # clamp below
    assert scalar_to_color(scale, 500.0) == (255.0, 0.0, 0.0)  # clamp above
    with pytest.raises(ValueError):
        scalar_to_color(scale, math.nan)


def test_hex_round_trip():
    assert rgb_to_hex((255.0, 127.5, 0.0)) == "#FF8000"
    assert hex_to_rgb("#FF8000") == (255.0, 128.0, 0.0)
    with pytest.raises(SceneFormatError):
        hex_to_rgb("FF8000")
    with pytest.raises(SceneFormatError):
        hex_to_rgb("#GGGGGG")


def test_json_round_trip_preserves_scene(tmp_path):
    scene = Scene(
        pois=(
            _poi("a", group_id="g1", category="cafe", image_ref="img/a.png",
                 scalar_value=12.5, scalar_unit="min"),
            _poi("b", x=4.0, group_id="g1"),
            POI(id="c", name="c", position=GeoCoordinate(47.377, 8.54)),
        ),
        groups=(LabelGroup("g1", "Group One", ("a", "b")),),
        thresholds=LodThresholds(40.0, 15.0, 25.0),
        color_scale=ColorScale(stops=((0.0, (255.0, 255.0, 255.0)), (1.0, (255.0, 0.0, 0.0)))),
        transition_duration_s=0.75,
        easing=EasingKind.CUBIC_OUT,
        name="round-trip",
        geo_origin=GeoCoordinate(47.3769, 8.5417),
        geo_compass_deg=90.0,
    )
    path = tmp_path / "scene.json"
    save_scene(scene, path)
    loaded = load_scene(path)
    assert loaded == scene
    assert validate_scene(loaded) == []


def test_scene_from_json_rejects_wrong_schema():
    with pytest.raises(SceneFormatError):
        scene_from_json({"schema": 99, "pois": []})
    with pytest.raises(SceneFormatError):
        scene_from_json([1, 2, 3])


def test_scene_from_json_group_membership_is_authoritative():
    doc = {
        "schema": 1,
        "pois": [
            {"id": "a", "position": {"x": 0, "z": -5}},
            {"id": "b", "position": {"x": 2, "z": -5}},
        ],
        "groups": [{"group_id": "g", "name": "G", "member_ids": ["a"]}],
    }
    scene = scene_from_json(doc)
    by_id = scene.poi_by_id()
    assert by_id["a"].group_id == "g"
    assert by_id["b"].group_id is None


def test_scene_from_json_structural_errors():
    with pytest.raises(SceneFormatError):
        scene_from_json({"schema": 1, "pois": [{"position": {"x": 0, "z": 0}}]})  # no id
    with pytest.raises(SceneFormatError):
        scene_from_json({"schema": 1, "pois": [{"id": "a", "position": {"x": 0}}]})  # no z
    with pytest.raises(SceneFormatError):
        scene_from_json({"schema": 1, "pois": [], "easing": "bounce"})


def test_domain_problems_load_but_fail_validation():
    doc = {
        "schema": 1,
        "pois": [
            {"id": "a", "position": {"x": 0, "z": -5}},
            {"id": "a", "position": {"x": 1, "z": -5}},
        ],
    }
    scene = scene_from_json(doc)  # loads fine
    assert any("duplicate" in p for p in validate_scene(scene))


def test_load_scene_rejects_garbage(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json", encoding="utf-8")
    with pytest.raises(SceneFormatError):
        load_scene(path)


def test_default_extents_ascend():
    lo, mid, hi = (DEFAULT_EXTENTS[lv] for lv in (LodLevel.LOWEST, LodLevel.MIDDLE, LodLevel.HIGHEST))
    assert lo.width <= mid.width <= hi.width
    assert lo.height <= mid.height <= hi.height


def test_position_json_accepts_y_default():
    doc = {"schema": 1, "pois": [{"id": "a", "position": {"x": 1, "z": 2}}]}
    scene = scene_from_json(doc)
    assert scene.pois[0].position == WorldPosition(1.0, 0.0, 2.0)


def test_scene_to_json_is_json_serializable():
    scene = _scene([_poi("a")])
    text = json.dumps(scene_to_json(scene))
    assert '"schema": 1' in text.replace("'", '"') or '"schema":1' in text.replace(" ", "")
