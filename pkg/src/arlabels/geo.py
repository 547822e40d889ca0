"""Device pose, geographic registration, and distance ordering.

World coordinates are right-handed with y up and the ground in the xz plane.
A device with yaw 0 looks along -z; yaw is a rotation about the vertical axis
and pitch tilts the view up or down.  Label placement only ever reads the
device position: yaw and pitch affect what a camera sees, never where labels
go.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

from .scene import GeoCoordinate, POI, Scene, WorldPosition

EARTH_RADIUS_M = 6_371_000.0

# Latitudes this close to the poles make the local east axis meaningless.
MAX_ABS_LAT_DEG = 89.0

# Horizontal distances closer than this relative gap are treated as ties and
# broken by id, so symmetric layouts order deterministically.
DISTANCE_TIE_REL = 1e-9


@dataclass(frozen=True, slots=True)
class DevicePose:
    position: WorldPosition
    yaw_deg: float = 0.0
    pitch_deg: float = 0.0
    geo: Optional[GeoCoordinate] = None
    compass_deg: float = 0.0

    def __post_init__(self) -> None:
        if not self.position.is_finite():
            raise ValueError("device position must be finite")
        if not (math.isfinite(self.yaw_deg) and math.isfinite(self.pitch_deg)):
            raise ValueError("device angles must be finite")
        object.__setattr__(self, "yaw_deg", self.yaw_deg % 360.0)


@dataclass(frozen=True, slots=True)
class SortedLabels:
    """POI ids in ascending horizontal-distance order with cached distances."""

    ids: tuple[str, ...]
    distances: tuple[float, ...]

    def __len__(self) -> int:
        return len(self.ids)


def horizontal_distance(a: WorldPosition, b: WorldPosition) -> float:
    return math.hypot(a.x - b.x, a.z - b.z)


def distances_tie(a: float, b: float) -> bool:
    return math.isclose(a, b, rel_tol=DISTANCE_TIE_REL, abs_tol=1e-12)


def geodetic_to_local(origin: GeoCoordinate, compass_deg: float, target: GeoCoordinate) -> WorldPosition:
    """Project a geographic coordinate into the local ground plane.

    Uses an equirectangular approximation around the origin: east is
    R*cos(lat0) per radian of longitude and north is R per radian of
    latitude.  The result is rotated so that the compass heading of the
    origin pose looks along -z.  Intended for neighborhood-scale offsets.
    """
    for coord in (origin, target):
        if not (math.isfinite(coord.lat_deg) and math.isfinite(coord.lon_deg)):
            raise ValueError("geographic coordinates must be finite")
        if abs(coord.lat_deg) >= MAX_ABS_LAT_DEG:
            raise ValueError(f"latitude {coord.lat_deg} too close to a pole")
    if not math.isfinite(compass_deg):
        raise ValueError("compass heading must be finite")

    east = EARTH_RADIUS_M * math.cos(math.radians(origin.lat_deg)) * math.radians(target.lon_deg - origin.lon_deg)
    north = EARTH_RADIUS_M * math.radians(target.lat_deg - origin.lat_deg)
    c = math.radians(compass_deg)
    x = east * math.cos(c) - north * math.sin(c)
    z = -(north * math.cos(c) + east * math.sin(c))
    return WorldPosition(x, 0.0, z)


def haversine_m(a: GeoCoordinate, b: GeoCoordinate) -> float:
    lat1, lon1, lat2, lon2 = map(math.radians, (a.lat_deg, a.lon_deg, b.lat_deg, b.lon_deg))
    s = math.sin((lat2 - lat1) / 2) ** 2 + math.cos(lat1) * math.cos(lat2) * math.sin((lon2 - lon1) / 2) ** 2
    return 2.0 * EARTH_RADIUS_M * math.asin(math.sqrt(s))


def resolve_anchor(scene: Scene, poi: POI) -> WorldPosition:
    """World anchor of a POI, projecting geographic positions via the scene origin."""
    if isinstance(poi.position, WorldPosition):
        return poi.position
    if scene.geo_origin is None:
        raise ValueError(f"poi {poi.id!r} has a geographic position but the scene has no geo_origin")
    return geodetic_to_local(scene.geo_origin, scene.geo_compass_deg, poi.position)


def resolve_anchors(scene: Scene) -> dict[str, WorldPosition]:
    return {poi.id: resolve_anchor(scene, poi) for poi in scene.pois}


def orient_billboard(
    anchor: WorldPosition,
    device_position: WorldPosition,
    previous: Optional[WorldPosition] = None,
) -> WorldPosition:
    """Unit horizontal normal pointing from the label anchor toward the device.

    Billboards rotate about the vertical axis only, so the normal always lies
    in the ground plane.  An anchor directly above or below the device has no
    defined heading; the previous normal is kept in that case (facing -z when
    there is none yet).
    """
    dx = device_position.x - anchor.x
    dz = device_position.z - anchor.z
    length = math.hypot(dx, dz)
    if length < 1e-12:
        return previous if previous is not None else WorldPosition(0.0, 0.0, -1.0)
    return WorldPosition(dx / length, 0.0, dz / length)


def order_by_distance(keys: Sequence[str], distance_of: dict[str, float]) -> list[str]:
    """Sort keys by horizontal distance, breaking near-exact ties by id."""
    ordered = sorted(keys, key=lambda k: (distance_of[k], k))
    # Runs of tied distances reorder by id so symmetric layouts are stable.
    out: list[str] = []
    i = 0
    while i < len(ordered):
        j = i + 1
        while j < len(ordered) and distances_tie(distance_of[ordered[j]], distance_of[ordered[i]]):
            j += 1
        out.extend(sorted(ordered[i:j]))
        i = j
    return out


def sort_by_distance(scene: Scene, device: DevicePose) -> SortedLabels:
    anchors = resolve_anchors(scene)
    dist = {pid: horizontal_distance(anchor, device.position) for pid, anchor in anchors.items()}
    ids = order_by_distance(list(dist), dist)
    return SortedLabels(ids=tuple(ids), distances=tuple(dist[i] for i in ids))
