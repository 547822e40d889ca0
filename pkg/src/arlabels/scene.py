"""Scene model: points of interest, groups, colors, and the scene JSON format.

A scene is an immutable description of the labelled world: every point of
interest (POI) with its anchor position, category, scalar reading and optional
group membership, plus the shared label styling (LOD extents, color scale,
easing and transition timing).  All mutable runtime state lives in the frame
pipeline; scenes only get replaced, never edited in place.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, NamedTuple, Optional, Sequence, Union

from .easing import EasingKind

SCHEMA_VERSION = 1

RGB = tuple[float, float, float]


class SceneFormatError(ValueError):
    """Raised when a scene document cannot be decoded at all."""


class LodLevel(Enum):
    LOWEST = "Lowest"
    MIDDLE = "Middle"
    HIGHEST = "Highest"

    @classmethod
    def from_name(cls, name: str) -> "LodLevel":
        for level in cls:
            if level.value == name:
                return level
        raise SceneFormatError(f"unknown LOD level {name!r}")


# Ascending detail order, used for extent-ordering checks.
LOD_ORDER = (LodLevel.LOWEST, LodLevel.MIDDLE, LodLevel.HIGHEST)


class Extent(NamedTuple):
    width: float
    height: float


@dataclass(frozen=True, slots=True)
class GeoCoordinate:
    lat_deg: float
    lon_deg: float


@dataclass(frozen=True, slots=True)
class WorldPosition:
    x: float
    y: float
    z: float

    def __add__(self, other: "WorldPosition") -> "WorldPosition":
        return WorldPosition(self.x + other.x, self.y + other.y, self.z + other.z)

    def __sub__(self, other: "WorldPosition") -> "WorldPosition":
        return WorldPosition(self.x - other.x, self.y - other.y, self.z - other.z)

    def scaled(self, k: float) -> "WorldPosition":
        return WorldPosition(self.x * k, self.y * k, self.z * k)

    def is_finite(self) -> bool:
        return all(map(math.isfinite, (self.x, self.y, self.z)))


Position = Union[WorldPosition, GeoCoordinate]


@dataclass(frozen=True, slots=True)
class POI:
    id: str
    name: str
    position: Position
    category: str = ""
    image_ref: str = ""
    scalar_value: float = 0.0
    scalar_unit: str = ""
    group_id: Optional[str] = None


@dataclass(frozen=True, slots=True)
class LabelGroup:
    group_id: str
    name: str
    member_ids: tuple[str, ...]


@dataclass(frozen=True, slots=True)
class LodThresholds:
    """Angular crowding controls, all in degrees.

    t_deg bounds the horizontal angular neighborhood considered around a
    label; m1_deg and m2_deg are the crowding totals below which a label is
    shown at highest and middle detail respectively.
    """

    t_deg: float = 45.0
    m1_deg: float = 20.0
    m2_deg: float = 30.0


@dataclass(frozen=True, slots=True)
class ColorScale:
    """Piecewise-linear scalar-to-color mapping over ascending value stops."""

    stops: tuple[tuple[float, RGB], ...]


DEFAULT_COLOR_SCALE = ColorScale(stops=((0.0, (255.0, 255.0, 255.0)), (120.0, (255.0, 0.0, 0.0))))

DEFAULT_EXTENTS: dict[LodLevel, Extent] = {
    LodLevel.LOWEST: Extent(60.0, 60.0),
    LodLevel.MIDDLE: Extent(90.0, 90.0),
    LodLevel.HIGHEST: Extent(120.0, 140.0),
}


@dataclass(frozen=True, slots=True)
class Scene:
    pois: tuple[POI, ...]
    groups: tuple[LabelGroup, ...] = ()
    thresholds: LodThresholds = LodThresholds()
    color_scale: ColorScale = DEFAULT_COLOR_SCALE
    label_extents: Mapping[LodLevel, Extent] = field(default_factory=lambda: dict(DEFAULT_EXTENTS))
    transition_duration_s: float = 1.0
    easing: EasingKind = EasingKind.SINE_IN_OUT
    name: str = ""
    geo_origin: Optional[GeoCoordinate] = None
    geo_compass_deg: float = 0.0

    def poi_by_id(self) -> dict[str, POI]:
        return {p.id: p for p in self.pois}

    def group_by_id(self) -> dict[str, LabelGroup]:
        return {g.group_id: g for g in self.groups}

    def extent(self, level: LodLevel) -> Extent:
        return self.label_extents[level]


def scalar_to_color(scale: ColorScale, value: float) -> RGB:
    """Map a scalar onto the scale; values beyond the ends clamp to the end colors."""
    stops = scale.stops
    if not stops:
        raise ValueError("color scale has no stops")
    if not math.isfinite(value):
        raise ValueError(f"non-finite scalar {value!r}")
    if value <= stops[0][0]:
        return stops[0][1]
    if value >= stops[-1][0]:
        return stops[-1][1]
    for (v0, c0), (v1, c1) in zip(stops, stops[1:]):
        if v0 <= value <= v1:
            t = (value - v0) / (v1 - v0)
            return (
                c0[0] + (c1[0] - c0[0]) * t,
                c0[1] + (c1[1] - c0[1]) * t,
                c0[2] + (c1[2] - c0[2]) * t,
            )
    raise ValueError("color scale stops are not ascending")


def rgb_to_hex(color: RGB) -> str:
    r, g, b = (max(0, min(255, round(c))) for c in color)
    return f"#{r:02X}{g:02X}{b:02X}"


def hex_to_rgb(text: str) -> RGB:
    if not (isinstance(text, str) and len(text) == 7 and text.startswith("#")):
        raise SceneFormatError(f"bad color literal {text!r}")
    try:
        return (float(int(text[1:3], 16)), float(int(text[3:5], 16)), float(int(text[5:7], 16)))
    except ValueError as exc:
        raise SceneFormatError(f"bad color literal {text!r}") from exc


def validate_scene(scene: Scene) -> list[str]:
    """Check every scene invariant and return one message per violation.

    An empty list means the scene is safe to hand to the engine.  Violations
    name the offending entity so callers can surface actionable errors.
    """
    problems: list[str] = []
    seen: set[str] = set()
    for poi in scene.pois:
        if poi.id in seen:
            problems.append(f"poi {poi.id!r}: duplicate id")
        seen.add(poi.id)
        if not poi.id:
            problems.append("poi with empty id")
        if isinstance(poi.position, WorldPosition):
            if not poi.position.is_finite():
                problems.append(f"poi {poi.id!r}: non-finite position")
        else:
            if not (math.isfinite(poi.position.lat_deg) and math.isfinite(poi.position.lon_deg)):
                problems.append(f"poi {poi.id!r}: non-finite geographic position")
            elif not (-90.0 <= poi.position.lat_deg <= 90.0 and -180.0 <= poi.position.lon_deg <= 180.0):
                problems.append(f"poi {poi.id!r}: geographic position out of range")
            if scene.geo_origin is None:
                problems.append(f"poi {poi.id!r}: geographic position but scene has no geo_origin")
        if not math.isfinite(poi.scalar_value):
            problems.append(f"poi {poi.id!r}: non-finite scalar_value")

    group_seen: set[str] = set()
    membership: dict[str, str] = {}
    for group in scene.groups:
        if group.group_id in group_seen:
            problems.append(f"group {group.group_id!r}: duplicate id")
        group_seen.add(group.group_id)
        if not group.member_ids:
            problems.append(f"group {group.group_id!r}: empty member list")
        for mid in group.member_ids:
            if mid not in seen:
                problems.append(f"group {group.group_id!r}: unknown member {mid!r}")
            elif mid in membership:
                problems.append(f"group {group.group_id!r}: member {mid!r} already in group {membership[mid]!r}")
            else:
                membership[mid] = group.group_id
    for poi in scene.pois:
        expected = membership.get(poi.id)
        if poi.group_id != expected:
            problems.append(f"poi {poi.id!r}: group_id {poi.group_id!r} does not match group membership {expected!r}")

    th = scene.thresholds
    if not all(map(math.isfinite, (th.t_deg, th.m1_deg, th.m2_deg))):
        problems.append("thresholds: non-finite value")
    elif not (0.0 < th.m1_deg < th.m2_deg <= th.t_deg):
        problems.append(f"thresholds: need 0 < m1 < m2 <= t, got ({th.t_deg}, {th.m1_deg}, {th.m2_deg})")

    stops = scene.color_scale.stops
    if len(stops) < 2:
        problems.append("color_scale: needs at least two stops")
    else:
        for (v0, _), (v1, _) in zip(stops, stops[1:]):
            if not v0 < v1:
                problems.append(f"color_scale: stops not strictly ascending at {v0}")
        for v, c in stops:
            if not math.isfinite(v) or not all(0.0 <= ch <= 255.0 for ch in c):
                problems.append(f"color_scale: bad stop at {v}")

    for level in LOD_ORDER:
        if level not in scene.label_extents:
            problems.append(f"label_extents: missing level {level.value}")
    if all(level in scene.label_extents for level in LOD_ORDER):
        lo, mid, hi = (scene.label_extents[level] for level in LOD_ORDER)
        for ext, level in ((lo, "Lowest"), (mid, "Middle"), (hi, "Highest")):
            if not (ext.width > 0 and ext.height > 0):
                problems.append(f"label_extents: non-positive extent for {level}")
        if not (lo.width <= mid.width <= hi.width and lo.height <= mid.height <= hi.height):
            problems.append("label_extents: extents must not shrink with increasing detail")

    if not (math.isfinite(scene.transition_duration_s) and scene.transition_duration_s > 0):
        problems.append(f"transition_duration_s: must be positive, got {scene.transition_duration_s}")

    return problems


# ---------------------------------------------------------------------------
# JSON document format, schema 1
# ---------------------------------------------------------------------------


def _position_from_json(obj: object, where: str) -> Position:
    if not isinstance(obj, dict):
        raise SceneFormatError(f"{where}: position must be an object")
    if "lat" in obj or "lon" in obj:
        try:
            return GeoCoordinate(float(obj["lat"]), float(obj["lon"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise SceneFormatError(f"{where}: bad geographic position") from exc
    try:
        return WorldPosition(float(obj["x"]), float(obj.get("y", 0.0)), float(obj["z"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise SceneFormatError(f"{where}: position needs x and z (or lat and lon)") from exc


def _position_to_json(pos: Position) -> dict:
    if isinstance(pos, GeoCoordinate):
        return {"lat": pos.lat_deg, "lon": pos.lon_deg}
    return {"x": pos.x, "y": pos.y, "z": pos.z}


def scene_from_json(doc: object) -> Scene:
    """Build a Scene from a decoded JSON document.

    Structural problems (missing fields, wrong types, unknown schema) raise
    SceneFormatError.  Domain problems (duplicate ids, bad thresholds) load
    fine and are reported by validate_scene instead.
    """
    if not isinstance(doc, dict):
        raise SceneFormatError("scene document must be a JSON object")
    if doc.get("schema") != SCHEMA_VERSION:
        raise SceneFormatError(f"unsupported scene schema {doc.get('schema')!r}, expected {SCHEMA_VERSION}")

    pois = []
    for i, p in enumerate(doc.get("pois", [])):
        if not isinstance(p, dict) or "id" not in p:
            raise SceneFormatError(f"pois[{i}]: each POI needs an id")
        pois.append(
            POI(
                id=str(p["id"]),
                name=str(p.get("name", p["id"])),
                position=_position_from_json(p.get("position"), f"pois[{i}]"),
                category=str(p.get("category", "")),
                image_ref=str(p.get("image_ref", "")),
                scalar_value=float(p.get("scalar_value", 0.0)),
                scalar_unit=str(p.get("scalar_unit", "")),
                group_id=None,
            )
        )

    groups = []
    for i, g in enumerate(doc.get("groups", [])):
        if not isinstance(g, dict) or "group_id" not in g:
            raise SceneFormatError(f"groups[{i}]: each group needs a group_id")
        groups.append(
            LabelGroup(
                group_id=str(g["group_id"]),
                name=str(g.get("name", g["group_id"])),
                member_ids=tuple(str(m) for m in g.get("member_ids", [])),
            )
        )

    # Group membership in the file is authoritative; POIs get back-references.
    owner: dict[str, str] = {}
    for g in groups:
        for mid in g.member_ids:
            owner.setdefault(mid, g.group_id)
    pois = [replace(p, group_id=owner.get(p.id)) for p in pois]

    thresholds = LodThresholds()
    if "thresholds" in doc:
        t = doc["thresholds"]
        try:
            thresholds = LodThresholds(float(t["t_deg"]), float(t["m1_deg"]), float(t["m2_deg"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise SceneFormatError("thresholds: need numeric t_deg, m1_deg, m2_deg") from exc

    color_scale = DEFAULT_COLOR_SCALE
    if "color_scale" in doc:
        try:
            stops = tuple(
                (float(s["value"]), hex_to_rgb(s["color"])) for s in doc["color_scale"]["stops"]
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise SceneFormatError("color_scale: bad stop list") from exc
        color_scale = ColorScale(stops=stops)

    extents = dict(DEFAULT_EXTENTS)
    if "label_extents" in doc:
        ext = doc["label_extents"]
        if not isinstance(ext, dict):
            raise SceneFormatError("label_extents: must be an object")
        for key, level in (("lowest", LodLevel.LOWEST), ("middle", LodLevel.MIDDLE), ("highest", LodLevel.HIGHEST)):
            if key in ext:
                try:
                    extents[level] = Extent(float(ext[key]["width"]), float(ext[key]["height"]))
                except (KeyError, TypeError, ValueError) as exc:
                    raise SceneFormatError(f"label_extents.{key}: need width and height") from exc

    easing = EasingKind.SINE_IN_OUT
    if "easing" in doc:
        try:
            easing = EasingKind(doc["easing"])
        except ValueError as exc:
            raise SceneFormatError(f"easing: unknown kind {doc['easing']!r}") from exc

    geo_origin = None
    compass = 0.0
    if "geo_origin" in doc:
        g = doc["geo_origin"]
        try:
            geo_origin = GeoCoordinate(float(g["lat"]), float(g["lon"]))
            compass = float(g.get("compass_deg", 0.0))
        except (KeyError, TypeError, ValueError) as exc:
            raise SceneFormatError("geo_origin: need lat and lon") from exc

    return Scene(
        pois=tuple(pois),
        groups=tuple(groups),
        thresholds=thresholds,
        color_scale=color_scale,
        label_extents=extents,
        transition_duration_s=float(doc.get("transition_duration_s", 1.0)),
        easing=easing,
        name=str(doc.get("name", "")),
        geo_origin=geo_origin,
        geo_compass_deg=compass,
    )


def scene_to_json(scene: Scene) -> dict:
    doc: dict = {
        "schema": SCHEMA_VERSION,
        "name": scene.name,
        "pois": [
            {
                "id": p.id,
                "name": p.name,
                "position": _position_to_json(p.position),
                "category": p.category,
                "image_ref": p.image_ref,
                "scalar_value": p.scalar_value,
                "scalar_unit": p.scalar_unit,
            }
            for p in scene.pois
        ],
        "groups": [
            {"group_id": g.group_id, "name": g.name, "member_ids": list(g.member_ids)}
            for g in scene.groups
        ],
        "thresholds": {
            "t_deg": scene.thresholds.t_deg,
            "m1_deg": scene.thresholds.m1_deg,
            "m2_deg": scene.thresholds.m2_deg,
        },
        "color_scale": {
            "stops": [{"value": v, "color": rgb_to_hex(c)} for v, c in scene.color_scale.stops]
        },
        "label_extents": {
            "lowest": dict(zip(("width", "height"), scene.label_extents[LodLevel.LOWEST])),
            "middle": dict(zip(("width", "height"), scene.label_extents[LodLevel.MIDDLE])),
            "highest": dict(zip(("width", "height"), scene.label_extents[LodLevel.HIGHEST])),
        },
        "transition_duration_s": scene.transition_duration_s,
        "easing": scene.easing.value,
    }
    if scene.geo_origin is not None:
        doc["geo_origin"] = {
            "lat": scene.geo_origin.lat_deg,
            "lon": scene.geo_origin.lon_deg,
            "compass_deg": scene.geo_compass_deg,
        }
    return doc


def load_scene(path: str | Path) -> Scene:
    text = Path(path).read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SceneFormatError(f"{path}: not valid JSON: {exc}") from exc
    return scene_from_json(doc)


def save_scene(scene: Scene, path: str | Path) -> None:
    Path(path).write_text(json.dumps(scene_to_json(scene), indent=2) + "\n", encoding="utf-8")
