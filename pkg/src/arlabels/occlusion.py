"""Greedy occlusion removal for billboard labels.

Labels are vertical rectangles standing on their anchors and facing the
device.  Working through the labels in ascending distance order, each label
casts rays from the device position through its four corners; if a ray passes
through an already-placed nearer label, the label slides up along the ray
through that occluder's top edge (scaled by the distance ratio, similar
triangles) plus a small margin, and probes again until it is free.  Nearer
labels never move for farther ones, so the pass terminates and earlier
placements stay valid.

Boundary contact does not count as occlusion: stacks of labels may touch
edge to edge.  A tiny tolerance relative to the label extent absorbs the
floating-point noise this would otherwise cause.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Hashable, Iterable, Mapping, Optional, Sequence

from .geo import distances_tie, horizontal_distance
from .scene import WorldPosition

# Fraction of the label extent treated as "touching, not overlapping".
CONTACT_TOL_FRAC = 1e-7

# Default shift margin as a fraction of the shifted label's height.
DEFAULT_MARGIN_FRAC = 0.01


class DegenerateGeometryError(ValueError):
    """The device sits on a label's plane, so corner rays are undefined."""


@dataclass(frozen=True, slots=True)
class BillboardRect:
    """A label rectangle: bottom-center anchor, extent, and horizontal normal."""

    anchor: WorldPosition
    width: float
    height: float
    normal: WorldPosition  # unit, y == 0, pointing toward the device

    def right(self) -> WorldPosition:
        return WorldPosition(-self.normal.z, 0.0, self.normal.x)

    def corners(self) -> tuple[WorldPosition, WorldPosition, WorldPosition, WorldPosition]:
        """Bottom-left, bottom-right, top-left, top-right."""
        r = self.right()
        hw = self.width / 2.0
        a = self.anchor
        bl = WorldPosition(a.x - r.x * hw, a.y, a.z - r.z * hw)
        br = WorldPosition(a.x + r.x * hw, a.y, a.z + r.z * hw)
        up = self.height
        return (
            bl,
            br,
            WorldPosition(bl.x, bl.y + up, bl.z),
            WorldPosition(br.x, br.y + up, br.z),
        )

    def with_bottom(self, y: float) -> "BillboardRect":
        return replace(self, anchor=WorldPosition(self.anchor.x, y, self.anchor.z))


@dataclass(frozen=True, slots=True)
class Ray:
    origin: WorldPosition
    direction: WorldPosition  # unit length


@dataclass(slots=True)
class OcclusionReport:
    rays_cast: int = 0
    shift_ops: int = 0
    shift_by_id: dict = field(default_factory=dict)

    @property
    def labels_shifted(self) -> int:
        return sum(1 for d in self.shift_by_id.values() if d > 0.0)


def corner_rays(rect: BillboardRect, device: WorldPosition) -> list[Ray]:
    """Unit rays from the device through the rectangle's four corners."""
    n = rect.normal
    offset = (rect.anchor.x - device.x) * n.x + (rect.anchor.z - device.z) * n.z
    if abs(offset) < 1e-12:
        raise DegenerateGeometryError("device lies on the label plane")
    rays = []
    for c in rect.corners():
        d = c - device
        length = math.sqrt(d.x * d.x + d.y * d.y + d.z * d.z)
        if length < 1e-12:
            raise DegenerateGeometryError("device coincides with a label corner")
        rays.append(Ray(device, WorldPosition(d.x / length, d.y / length, d.z / length)))
    return rays


def ray_hits_rect(ray: Ray, rect: BillboardRect) -> Optional[float]:
    """Euclidean distance to the hit point, or None.

    Only strict interior hits at positive ray parameter count; grazing an
    edge (within the contact tolerance) is a miss.
    """
    n = rect.normal
    d = ray.direction
    denom = d.x * n.x + d.z * n.z
    if abs(denom) < 1e-15:
        return None
    a = rect.anchor
    o = ray.origin
    t = ((a.x - o.x) * n.x + (a.z - o.z) * n.z) / denom
    if t <= 1e-12:
        return None
    hx = o.x + d.x * t
    hy = o.y + d.y * t
    hz = o.z + d.z * t
    tol = CONTACT_TOL_FRAC * max(rect.width, rect.height)
    u = (hx - a.x) * -n.z + (hz - a.z) * n.x
    if abs(u) >= rect.width / 2.0 - tol:
        return None
    v = hy - a.y
    if v <= tol or v >= rect.height - tol:
        return None
    return t  # direction is unit length, so the parameter is the distance


# Probe outcomes for one candidate rectangle against a label's corner rays.
_MISS_BELOW = 0  # missed underneath; may hit after the label rises
_MISS_FOREVER = 1  # can never hit, no matter how far the label rises
_HIT = 2


def _probe_rect(device: WorldPosition, label: BillboardRect, cand: BillboardRect, include_center: bool) -> int:
    """Classify whether the label's rays pierce the candidate rectangle.

    Uses unnormalized directions: as the label slides up, each ray keeps its
    horizontal direction, so the plane parameter and lateral coordinate of
    the intersection are fixed and only its height grows.  That makes
    lateral and overhead misses permanent, which resolve_all exploits.
    """
    n = cand.normal
    a = cand.anchor
    tol = CONTACT_TOL_FRAC * max(cand.width, cand.height)
    half = cand.width / 2.0 - tol
    points = list(label.corners())
    if include_center:
        la = label.anchor
        points.append(WorldPosition(la.x, la.y + label.height / 2.0, la.z))
    plane_off = (a.x - device.x) * n.x + (a.z - device.z) * n.z
    outcome = _MISS_FOREVER
    for c in points:
        dx = c.x - device.x
        dy = c.y - device.y
        dz = c.z - device.z
        denom = dx * n.x + dz * n.z
        if abs(denom) < 1e-15:
            continue
        t = plane_off / denom
        if t <= 1e-12:
            continue
        u = (device.x + dx * t - a.x) * -n.z + (device.z + dz * t - a.z) * n.x
        if abs(u) >= half:
            continue
        v = device.y + dy * t - a.y
        if v >= cand.height - tol:
            continue
        if v <= tol:
            outcome = _MISS_BELOW
            continue
        return _HIT
    return outcome


def detect_occluder(
    label: BillboardRect,
    placed: Sequence[tuple[Hashable, BillboardRect]],
    device: WorldPosition,
    *,
    include_center: bool = False,
) -> Optional[Hashable]:
    """First placed label (scanning nearest first) pierced by the label's rays.

    Callers pass the already-placed, strictly nearer labels in ascending
    distance order, so the first hit is also the closest occluder.
    """
    for key, cand in placed:
        if _probe_rect(device, label, cand, include_center) == _HIT:
            return key
    return None


def _clearing_bottom(
    device: WorldPosition,
    label: BillboardRect,
    cand: BillboardRect,
    margin: float,
    include_center: bool,
) -> float:
    """Smallest bottom height at which every probe ray clears the candidate.

    Exact oblique fallback for shift_over: a ray's plane parameter and
    lateral hit coordinate never change as the label rises, so each ray that
    crosses the candidate's lateral band pins the exact bottom height at
    which it grazes the candidate's top edge.  The binding ray wins.
    """
    n = cand.normal
    a = cand.anchor
    tol = CONTACT_TOL_FRAC * max(cand.width, cand.height)
    half = cand.width / 2.0 - tol
    top = a.y + cand.height
    plane_off = (a.x - device.x) * n.x + (a.z - device.z) * n.z
    bottom = label.anchor.y
    points = list(label.corners())
    if include_center:
        la = label.anchor
        points.append(WorldPosition(la.x, la.y + label.height / 2.0, la.z))
    needed = bottom
    for c in points:
        dx = c.x - device.x
        dz = c.z - device.z
        denom = dx * n.x + dz * n.z
        if abs(denom) < 1e-15:
            continue
        t = plane_off / denom
        if t <= 1e-12:
            continue
        u = (device.x + dx * t - a.x) * -n.z + (device.z + dz * t - a.z) * n.x
        if abs(u) >= half:
            continue
        rise = c.y - bottom  # 0 at bottom corners, height at top corners
        needed = max(needed, device.y + (top - device.y) / t - rise)
    return needed + margin


def _bottom_above_hits(
    device: WorldPosition,
    blocker: BillboardRect,
    victim: BillboardRect,
    margin: float,
) -> float:
    """Bottom height that lifts the victim above the blocker's piercing rays.

    Strict-sweep counterpart of _clearing_bottom: here the rays belong to
    the nearer, static blocker and the farther victim must rise until its
    interior band sits above every ray that crosses it.
    """
    n = victim.normal
    a = victim.anchor
    tol = CONTACT_TOL_FRAC * max(victim.width, victim.height)
    half = victim.width / 2.0 - tol
    plane_off = (a.x - device.x) * n.x + (a.z - device.z) * n.z
    points = list(blocker.corners())
    ba = blocker.anchor
    points.append(WorldPosition(ba.x, ba.y + blocker.height / 2.0, ba.z))
    needed = a.y
    for c in points:
        dx = c.x - device.x
        dz = c.z - device.z
        denom = dx * n.x + dz * n.z
        if abs(denom) < 1e-15:
            continue
        t = plane_off / denom
        if t <= 1e-12:
            continue
        u = (device.x + dx * t - a.x) * -n.z + (device.z + dz * t - a.z) * n.x
        if abs(u) >= half:
            continue
        v = device.y + (c.y - device.y) * t  # hit height on the victim plane
        if v < a.y + victim.height - tol:
            needed = max(needed, v)
    return needed + margin


def shift_over(
    label: BillboardRect,
    occluder: BillboardRect,
    device: WorldPosition,
    *,
    margin: float = 0.0,
) -> float:
    """New bottom height that lifts the label just above the occluder.

    Casts the ray from the device eye through the occluder's top edge and
    extends it to the label's own distance; the label bottom lands on that
    ray plus the margin.  Works for equal distances too (ratio one), where
    the label simply pops straight above the occluder.
    """
    d_label = horizontal_distance(label.anchor, device)
    d_occ = horizontal_distance(occluder.anchor, device)
    if d_occ <= 0.0:
        raise ValueError("occluder sits at the device position")
    if d_label < d_occ and not distances_tie(d_label, d_occ):
        raise ValueError("occluder must not be farther than the shifted label")
    top = occluder.anchor.y + occluder.height
    slope = (top - device.y) / d_occ
    return device.y + slope * d_label + margin


def resolve_all(
    order: Sequence[Hashable],
    rects: Mapping[Hashable, BillboardRect],
    device: WorldPosition,
    *,
    margin_frac: float = DEFAULT_MARGIN_FRAC,
    strict: bool = False,
    prune: bool = True,
) -> tuple[dict, OcclusionReport]:
    """Place every label occlusion-free, nearest label first.

    Returns the final rectangles keyed like ``rects`` plus a report with the
    per-label upward shift, total rays cast, and shift operations.  ``order``
    must already be sorted by ascending horizontal distance (ties broken by
    key).  Anchors only ever move straight up; the nearest label never moves.
    Labels at indistinguishable distances are placed side by side without
    testing each other.

    ``prune`` skips candidates that can never be hit again (the label only
    rises); it changes nothing about the result and exists so tests can
    compare against the plain scan.  ``strict`` adds a fifth center ray and
    extra sweeps that also shift labels occluded by nearer, larger labels
    behind which they would otherwise hide; use it for scenes that violate
    the nearer-is-larger assumption.
    """
    report = OcclusionReport()
    keys = list(order)
    dist = {k: horizontal_distance(rects[k].anchor, device) for k in keys}
    placed: dict = {}
    placed_order: list = []  # keys in placement order, ascending distance
    rays_per_round = 5 if strict else 4

    for idx, key in enumerate(keys):
        rect = rects[key]
        start_y = rect.anchor.y
        if idx == 0:
            placed[key] = rect
            placed_order.append(key)
            report.shift_by_id[key] = 0.0
            continue
        # Strictly nearer labels only; distance ties live side by side.
        closer = [k for k in placed_order if dist[k] < dist[key] and not distances_tie(dist[k], dist[key])]
        margin = margin_frac * rect.height
        skip: set = set()
        rounds = 0
        while True:
            report.rays_cast += rays_per_round
            rounds += 1
            occluder_key = None
            for k in closer:
                if k in skip:
                    continue
                outcome = _probe_rect(device, rect, placed[k], strict)
                if outcome == _HIT:
                    occluder_key = k
                    break
                if prune and outcome == _MISS_FOREVER:
                    skip.add(k)
            if occluder_key is None:
                break
            new_y = shift_over(rect, placed[occluder_key], device, margin=margin)
            if new_y <= rect.anchor.y:
                # The distance-ratio lift is exact only when label and
                # occluder share an azimuth; oblique partial overlaps can
                # under-lift.  Fall back to the per-ray clearing height.
                new_y = _clearing_bottom(device, rect, placed[occluder_key], margin, strict)
            if new_y <= rect.anchor.y:
                # Numerical corner case: force progress so the loop cannot stall.
                new_y = rect.anchor.y + max(margin, 1e-9 * max(1.0, rect.height))
            rect = rect.with_bottom(new_y)
            report.shift_ops += 1
            if rounds > 4 * len(closer) + 64:
                raise RuntimeError(f"occlusion resolution did not settle for {key!r}")
        placed[key] = rect
        placed_order.append(key)
        report.shift_by_id[key] = rect.anchor.y - start_y

    if strict:
        _strict_sweeps(keys, dist, placed, device, margin_frac, report)

    return placed, report


def _strict_sweeps(
    keys: list,
    dist: dict,
    placed: dict,
    device: WorldPosition,
    margin_frac: float,
    report: OcclusionReport,
) -> None:
    """Extra strict-mode sweeps: rays that pierce a farther label mean the
    farther label hides behind this one and must climb over it."""
    for _ in range(5 * len(keys) + 8):
        changed = False
        for key in keys:
            rect = placed[key]
            report.rays_cast += 5
            for other in keys:
                if other == key or distances_tie(dist[other], dist[key]):
                    continue
                if _probe_rect(device, rect, placed[other], True) != _HIT:
                    continue
                victim, blocker = (key, other) if dist[other] < dist[key] else (other, key)
                margin = margin_frac * placed[victim].height
                new_y = shift_over(placed[victim], placed[blocker], device, margin=margin)
                if new_y <= placed[victim].anchor.y:
                    # Oblique geometry: fall back to the exact per-ray lift.
                    if victim == key:
                        new_y = _clearing_bottom(
                            device, placed[victim], placed[blocker], margin, True
                        )
                    else:
                        new_y = _bottom_above_hits(
                            device, placed[blocker], placed[victim], margin
                        )
                if new_y > placed[victim].anchor.y:
                    delta = new_y - placed[victim].anchor.y
                    placed[victim] = placed[victim].with_bottom(new_y)
                    report.shift_by_id[victim] = report.shift_by_id.get(victim, 0.0) + delta
                    report.shift_ops += 1
                    changed = True
                    if victim == key:
                        rect = placed[key]
        if not changed:
            break


def facing_rect(
    anchor: WorldPosition,
    width: float,
    height: float,
    device: WorldPosition,
    previous_normal: Optional[WorldPosition] = None,
) -> BillboardRect:
    """Convenience: a rectangle at the anchor turned toward the device."""
    from .geo import orient_billboard

    return BillboardRect(
        anchor=anchor,
        width=width,
        height=height,
        normal=orient_billboard(anchor, device, previous_normal),
    )
