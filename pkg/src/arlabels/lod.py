"""Level-of-detail banding and group aggregation.

A label's detail level depends on how crowded its viewing direction is: the
angular widths of nearer labels within a horizontal cone around it add up to
a crowding total, and fixed thresholds band that total into Highest, Middle
or Lowest detail.  Only the device position matters; turning the device never
changes an assignment.

Groups of labels collapse into a single super label while the device is far
away from the group's region and some other group is closer; walking into a
group splits it back into its members.  A hysteresis band around the region
boundary keeps the decision from flickering.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Mapping, Optional, Sequence

from .geo import DevicePose, horizontal_distance, order_by_distance, resolve_anchors
from .occlusion import BillboardRect
from .scene import RGB, LodLevel, Scene, WorldPosition, scalar_to_color

DEFAULT_GROUP_RADIUS = 50.0
DEFAULT_HYSTERESIS_FRAC = 0.1

# Elements each detail level shows on a label.
LOD_ELEMENTS: dict[LodLevel, frozenset[str]] = {
    LodLevel.LOWEST: frozenset({"rectangle", "icon"}),
    LodLevel.MIDDLE: frozenset({"rectangle", "icon", "image"}),
    LodLevel.HIGHEST: frozenset({"rectangle", "icon", "image", "text"}),
}

ELEMENTS = ("rectangle", "icon", "image", "text")


def angular_width(rect: BillboardRect, device: WorldPosition) -> float:
    """Horizontal angular width of the rectangle as seen from the device, degrees."""
    dist = horizontal_distance(rect.anchor, device)
    if dist <= 0.0:
        raise ValueError("label sits at the device position; angular width undefined")
    return math.degrees(2.0 * math.atan(rect.width / 2.0 / dist))


def _angle_between_deg(a: float, b: float) -> float:
    d = abs(a - b) % 360.0
    return 360.0 - d if d > 180.0 else d


@dataclass(frozen=True, slots=True)
class CrowdingEntry:
    """One label's view geometry for banding: direction, footprint, order."""

    key: Hashable
    azimuth_deg: float
    width_deg: float


def band_crowding(
    entries: Sequence[CrowdingEntry],
    t_deg: float,
    m1_deg: float,
    m2_deg: float,
) -> tuple[dict, dict]:
    """Band each entry by accumulated crowding of the nearer entries around it.

    Entries must be in ascending distance order.  For each label, the
    crowding total is the sum of the angular widths of earlier entries whose
    viewing direction deviates at most t_deg from the label's own.  Totals
    below m1_deg give Highest detail, below m2_deg Middle, anything else
    Lowest.  Returns (levels, crowding_totals) keyed by entry key.
    """
    levels: dict = {}
    totals: dict = {}
    for i, entry in enumerate(entries):
        total = 0.0
        for other in entries[:i]:
            if _angle_between_deg(other.azimuth_deg, entry.azimuth_deg) <= t_deg:
                total += other.width_deg
        if total < m1_deg:
            level = LodLevel.HIGHEST
        elif total < m2_deg:
            level = LodLevel.MIDDLE
        else:
            level = LodLevel.LOWEST
        levels[entry.key] = level
        totals[entry.key] = total
    return levels, totals


@dataclass(frozen=True, slots=True)
class LodAssignment:
    levels: Mapping[str, LodLevel]
    crowding_deg: Mapping[str, float]


def assign_lods(
    scene: Scene,
    device: DevicePose,
    prev_levels: Optional[Mapping[str, LodLevel]] = None,
) -> LodAssignment:
    """Band every POI in the scene by angular crowding.

    Footprint widths come from each label's previous detail level so the
    assignment reflects what was actually on screen; the first frame (no
    previous levels) assumes the largest extent everywhere.
    """
    anchors = resolve_anchors(scene)
    dist = {pid: horizontal_distance(anchor, device.position) for pid, anchor in anchors.items()}
    ordered = order_by_distance(list(dist), dist)
    prev = prev_levels or {}
    entries = []
    for pid in ordered:
        a = anchors[pid]
        dx, dz = a.x - device.position.x, a.z - device.position.z
        d = dist[pid]
        if d <= 0.0:
            # Degenerate: a label at the device fills the view.
            azimuth, width = 0.0, 180.0
        else:
            azimuth = math.degrees(math.atan2(dx, -dz))
            extent = scene.extent(prev.get(pid, LodLevel.HIGHEST))
            width = math.degrees(2.0 * math.atan(extent.width / 2.0 / d))
        entries.append(CrowdingEntry(pid, azimuth, width))
    th = scene.thresholds
    levels, totals = band_crowding(entries, th.t_deg, th.m1_deg, th.m2_deg)
    return LodAssignment(levels=levels, crowding_deg=totals)


# ---------------------------------------------------------------------------
# Group aggregation
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class LegendEntry:
    name: str
    value: float
    color: RGB


@dataclass(frozen=True, slots=True)
class SuperLabel:
    group_id: str
    name: str
    position: WorldPosition  # ground anchor at the member centroid
    aggregate_value: float
    legend: tuple[LegendEntry, ...]
    member_ids: tuple[str, ...]


@dataclass(frozen=True, slots=True)
class AggregationDecision:
    aggregated: Mapping[str, bool]  # group_id -> collapsed?
    supers: tuple[SuperLabel, ...]  # one per collapsed group
    hidden_member_ids: frozenset[str]


def _region_contains(
    anchors: Sequence[WorldPosition], point: WorldPosition, radius: float
) -> bool:
    min_x = min(a.x for a in anchors) - radius
    max_x = max(a.x for a in anchors) + radius
    min_z = min(a.z for a in anchors) - radius
    max_z = max(a.z for a in anchors) + radius
    return min_x <= point.x <= max_x and min_z <= point.z <= max_z


def aggregate_groups(
    scene: Scene,
    device: DevicePose,
    *,
    group_radius: float = DEFAULT_GROUP_RADIUS,
    prev_aggregated: Optional[Mapping[str, bool]] = None,
    hysteresis_frac: float = DEFAULT_HYSTERESIS_FRAC,
) -> AggregationDecision:
    """Decide which groups collapse into super labels for this device position.

    A group stays individual while the device is inside its region (the
    bounding box of its member anchors grown by group_radius) or while it is
    the closest group by centroid distance.  With previous flags supplied,
    the region test applies a hysteresis band of +-hysteresis_frac around the
    radius so small movements near the boundary cannot toggle the decision.
    """
    if not scene.groups:
        return AggregationDecision(aggregated={}, supers=(), hidden_member_ids=frozenset())

    anchors = resolve_anchors(scene)
    pois = scene.poi_by_id()
    centroids: dict[str, WorldPosition] = {}
    for group in scene.groups:
        pts = [anchors[mid] for mid in group.member_ids]
        centroids[group.group_id] = WorldPosition(
            sum(p.x for p in pts) / len(pts), 0.0, sum(p.z for p in pts) / len(pts)
        )

    closest_gid = min(
        (g.group_id for g in scene.groups),
        key=lambda gid: (horizontal_distance(centroids[gid], device.position), gid),
    )

    flags: dict[str, bool] = {}
    supers: list[SuperLabel] = []
    hidden: set[str] = set()
    prev = prev_aggregated or {}
    for group in scene.groups:
        gid = group.group_id
        pts = [anchors[mid] for mid in group.member_ids]
        if gid in prev:
            # Hysteresis: a collapsed group splits only once the device is
            # well inside; an individual group collapses only well outside.
            radius = group_radius * (1.0 - hysteresis_frac) if prev[gid] else group_radius * (1.0 + hysteresis_frac)
        else:
            radius = group_radius
        inside = _region_contains(pts, device.position, radius)
        collapsed = (gid != closest_gid) and not inside
        flags[gid] = collapsed
        if not collapsed:
            continue
        members = [pois[mid] for mid in group.member_ids]
        mean_value = sum(m.scalar_value for m in members) / len(members)
        legend = tuple(
            LegendEntry(m.name, m.scalar_value, scalar_to_color(scene.color_scale, m.scalar_value))
            for m in members
        )
        supers.append(
            SuperLabel(
                group_id=gid,
                name=group.name,
                position=centroids[gid],
                aggregate_value=mean_value,
                legend=legend,
                member_ids=tuple(group.member_ids),
            )
        )
        hidden.update(group.member_ids)

    return AggregationDecision(
        aggregated=flags, supers=tuple(supers), hidden_member_ids=frozenset(hidden)
    )
