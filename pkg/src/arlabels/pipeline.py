"""Per-frame orchestration: pose in, self-contained frame snapshot out.

Every frame runs the same stages: pose intake, label positioning and
distance ordering, aggregation and detail banding, occlusion removal on the
banded extents, and finally coherence, which turns changed goals into eased
transitions and evaluates them at the frame timestamp.  The emitted snapshot
carries everything a renderer needs (positions, orientations, extents,
colors, per-element opacities, legends, instrumentation) so it can be drawn
without access to the engine.

Placement is a pure function of scene, configuration, pose and time: the
same inputs always produce the same snapshot, bit for bit, except for the
stage timing measurements.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field, replace
from typing import Hashable, Iterable, Mapping, Optional, Sequence, Union

from .coherence import Transition, retarget
from .easing import EasingKind
from .geo import (
    DevicePose,
    geodetic_to_local,
    horizontal_distance,
    order_by_distance,
    orient_billboard,
    resolve_anchors,
)
from .lod import (
    DEFAULT_GROUP_RADIUS,
    ELEMENTS,
    LOD_ELEMENTS,
    AggregationDecision,
    CrowdingEntry,
    SuperLabel,
    aggregate_groups,
    band_crowding,
)
from .occlusion import DEFAULT_MARGIN_FRAC, BillboardRect, resolve_all
from .scene import (
    SCHEMA_VERSION,
    Extent,
    LodLevel,
    LodThresholds,
    Scene,
    WorldPosition,
    rgb_to_hex,
    scalar_to_color,
    validate_scene,
)

EntityKey = tuple[str, str]  # ("poi", id) or ("group", id)

STAGES = ("input", "positioning", "occlusion", "lod", "coherence")


class ConfigError(ValueError):
    """A configuration update was rejected; engine state is unchanged."""


@dataclass(frozen=True, slots=True)
class LegendLine:
    name: str
    value: float
    color: str  # "#RRGGBB"


@dataclass(frozen=True, slots=True)
class FrameLabel:
    kind: str  # "poi" or "super"
    id: str
    name: str
    position: WorldPosition
    normal: WorldPosition
    lod: LodLevel
    alpha: Mapping[str, float]
    color: str  # "#RRGGBB"
    extent: Extent
    category: str = ""
    image_ref: str = ""
    scalar_value: float = 0.0
    scalar_unit: str = ""
    aggregate_value: Optional[float] = None
    legend: tuple[LegendLine, ...] = ()
    member_ids: tuple[str, ...] = ()


@dataclass(frozen=True, slots=True)
class FrameInstrumentation:
    rays_cast: int
    shift_ops: int
    labels_shifted: int
    stage_us: Mapping[str, int]


@dataclass(frozen=True, slots=True)
class FrameSnapshot:
    schema: int
    frame: int
    timestamp: float
    device: DevicePose
    labels: tuple[FrameLabel, ...]
    instrumentation: FrameInstrumentation


def snapshot_to_dict(snap: FrameSnapshot) -> dict:
    def pos(p: WorldPosition) -> dict:
        return {"x": p.x, "y": p.y, "z": p.z}

    labels = []
    for lab in snap.labels:
        rec: dict = {
            "kind": lab.kind,
            ("poi_id" if lab.kind == "poi" else "group_id"): lab.id,
            "name": lab.name,
            "position": pos(lab.position),
            "normal": pos(lab.normal),
            "lod": lab.lod.value,
            "alpha": dict(lab.alpha),
            "color": lab.color,
            "extent": {"width": lab.extent.width, "height": lab.extent.height},
            "category": lab.category,
            "image_ref": lab.image_ref,
            "scalar_value": lab.scalar_value,
            "scalar_unit": lab.scalar_unit,
        }
        if lab.kind == "super":
            rec["aggregate_value"] = lab.aggregate_value
            rec["legend"] = [
                {"name": e.name, "value": e.value, "color": e.color} for e in lab.legend
            ]
            rec["member_ids"] = list(lab.member_ids)
        labels.append(rec)

    return {
        "schema": snap.schema,
        "frame": snap.frame,
        "timestamp": snap.timestamp,
        "device": {
            "position": pos(snap.device.position),
            "yaw_deg": snap.device.yaw_deg,
            "pitch_deg": snap.device.pitch_deg,
        },
        "labels": labels,
        "instrumentation": {
            "rays_cast": snap.instrumentation.rays_cast,
            "shifts": snap.instrumentation.shift_ops,
            "labels_shifted": snap.instrumentation.labels_shifted,
            "stage_us": dict(snap.instrumentation.stage_us),
        },
    }


def snapshot_to_json_line(snap: FrameSnapshot) -> str:
    return json.dumps(snapshot_to_dict(snap), separators=(",", ":"))


# ---------------------------------------------------------------------------
# Engine
# ---------------------------------------------------------------------------


@dataclass(slots=True)
class _EntityState:
    pos: Union[Transition, WorldPosition]
    label_alpha: Union[Transition, float]
    element_alpha: dict
    lod: LodLevel
    last_normal: Optional[WorldPosition] = None


def _value(animated, t_now: float):
    return animated.value_at(t_now) if isinstance(animated, Transition) else animated


def _settle(animated, t_now: float):
    """Collapse a finished transition to its goal value."""
    if isinstance(animated, Transition) and animated.done(t_now):
        return animated.goal_value
    return animated


class LabelEngine:
    """Stateful frame engine for one scene and one device stream.

    One engine serves one consumer; drive it from a single thread or task.
    Frame timestamps must never decrease.
    """

    def __init__(
        self,
        scene: Scene,
        *,
        group_radius: float = DEFAULT_GROUP_RADIUS,
        shift_margin_frac: float = DEFAULT_MARGIN_FRAC,
        strict_occlusion: bool = False,
        validate: bool = True,
    ) -> None:
        if validate:
            problems = validate_scene(scene)
            if problems:
                raise ValueError("invalid scene: " + "; ".join(problems))
        self._scene = scene
        self.group_radius = group_radius
        self.shift_margin_frac = shift_margin_frac
        self.strict_occlusion = strict_occlusion
        self._anchors = resolve_anchors(scene)
        self._states: dict[EntityKey, _EntityState] = {}
        self._prev_lods: dict[str, LodLevel] = {}
        self._prev_aggregated: dict[str, bool] = {}
        self._frame = 0
        self._last_t: Optional[float] = None

    @property
    def scene(self) -> Scene:
        return self._scene

    # -- configuration ----------------------------------------------------

    def apply_config(self, overrides: Mapping) -> None:
        """Atomically apply runtime overrides; rejects bad input untouched.

        Supported keys: thresholds {t_deg,m1_deg,m2_deg}, easing (curve
        name), transition_duration_s, scalars {poi_id: value}, group_radius,
        shift_margin_frac, strict_occlusion.
        """
        if not isinstance(overrides, Mapping):
            raise ConfigError("config must be an object")
        known = {
            "thresholds", "easing", "transition_duration_s", "scalars",
            "group_radius", "shift_margin_frac", "strict_occlusion",
        }
        unknown = set(overrides) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")

        scene = self._scene
        if "thresholds" in overrides:
            t = overrides["thresholds"]
            try:
                th = LodThresholds(float(t["t_deg"]), float(t["m1_deg"]), float(t["m2_deg"]))
            except (KeyError, TypeError, ValueError) as exc:
                raise ConfigError("thresholds: need numeric t_deg, m1_deg, m2_deg") from exc
            if not (0.0 < th.m1_deg < th.m2_deg <= th.t_deg):
                raise ConfigError(f"thresholds: need 0 < m1 < m2 <= t, got {t}")
            scene = replace(scene, thresholds=th)
        if "easing" in overrides:
            try:
                scene = replace(scene, easing=EasingKind(overrides["easing"]))
            except ValueError as exc:
                raise ConfigError(f"unknown easing {overrides['easing']!r}") from exc
        if "transition_duration_s" in overrides:
            try:
                dur = float(overrides["transition_duration_s"])
            except (TypeError, ValueError) as exc:
                raise ConfigError("transition_duration_s must be a number") from exc
            if not (math.isfinite(dur) and dur > 0):
                raise ConfigError(f"transition_duration_s must be positive, got {dur}")
            scene = replace(scene, transition_duration_s=dur)
        if "scalars" in overrides:
            updates = overrides["scalars"]
            if not isinstance(updates, Mapping):
                raise ConfigError("scalars must map poi ids to numbers")
            ids = {p.id for p in scene.pois}
            for pid, value in updates.items():
                if pid not in ids:
                    raise ConfigError(f"scalars: unknown poi {pid!r}")
                try:
                    v = float(value)
                except (TypeError, ValueError) as exc:
                    raise ConfigError(f"scalars[{pid!r}] must be a number") from exc
                if not math.isfinite(v):
                    raise ConfigError(f"scalars[{pid!r}] must be finite")
            scene = replace(
                scene,
                pois=tuple(
                    replace(p, scalar_value=float(updates[p.id])) if p.id in updates else p
                    for p in scene.pois
                ),
            )
        radius = self.group_radius
        if "group_radius" in overrides:
            try:
                radius = float(overrides["group_radius"])
            except (TypeError, ValueError) as exc:
                raise ConfigError("group_radius must be a number") from exc
            if not (math.isfinite(radius) and radius >= 0):
                raise ConfigError(f"group_radius must be non-negative, got {radius}")
        margin = self.shift_margin_frac
        if "shift_margin_frac" in overrides:
            try:
                margin = float(overrides["shift_margin_frac"])
            except (TypeError, ValueError) as exc:
                raise ConfigError("shift_margin_frac must be a number") from exc
            if not (math.isfinite(margin) and margin >= 0):
                raise ConfigError(f"shift_margin_frac must be non-negative, got {margin}")
        strict = self.strict_occlusion
        if "strict_occlusion" in overrides:
            if not isinstance(overrides["strict_occlusion"], bool):
                raise ConfigError("strict_occlusion must be a boolean")
            strict = overrides["strict_occlusion"]

        # All validated; commit.
        self._scene = scene
        self.group_radius = radius
        self.shift_margin_frac = margin
        self.strict_occlusion = strict

    # -- frame update -------------------------------------------------------

    def update_frame(self, pose: DevicePose, t_now: float) -> FrameSnapshot:
        stage_ns: dict[str, int] = {}
        clock = time.perf_counter_ns

        # input: timestamp discipline and pose intake
        t0 = clock()
        if not math.isfinite(t_now):
            raise ValueError("frame timestamp must be finite")
        if self._last_t is not None and t_now < self._last_t:
            raise ValueError(f"frame timestamps must not decrease ({t_now} < {self._last_t})")
        first_frame = self._last_t is None
        self._last_t = t_now
        if pose.geo is not None and self._scene.geo_origin is not None:
            ground = geodetic_to_local(
                self._scene.geo_origin, self._scene.geo_compass_deg, pose.geo
            )
            # The projection is horizontal; the pose's own y carries device height.
            pose = DevicePose(
                position=WorldPosition(ground.x, pose.position.y, ground.z),
                yaw_deg=pose.yaw_deg,
                pitch_deg=pose.pitch_deg,
            )
        device = pose.position
        stage_ns["input"] = clock() - t0

        # positioning: anchor distances and global ordering
        t0 = clock()
        scene = self._scene
        anchors = self._anchors
        poi_dist = {pid: horizontal_distance(a, device) for pid, a in anchors.items()}
        stage_ns["positioning"] = clock() - t0

        # lod: aggregation decision, visible set, crowding bands
        t0 = clock()
        decision = aggregate_groups(
            scene,
            pose,
            group_radius=self.group_radius,
            prev_aggregated=self._prev_aggregated or None,
        )
        self._prev_aggregated = dict(decision.aggregated)
        supers = {("group", s.group_id): s for s in decision.supers}
        entity_anchor: dict[EntityKey, WorldPosition] = {}
        for poi in scene.pois:
            if poi.id not in decision.hidden_member_ids:
                entity_anchor[("poi", poi.id)] = anchors[poi.id]
        for key, sup in supers.items():
            entity_anchor[key] = sup.position
        entity_dist = {k: horizontal_distance(a, device) for k, a in entity_anchor.items()}
        visible_order = order_by_distance(list(entity_anchor), entity_dist)

        goal_lods = self._band_visible(visible_order, entity_anchor, entity_dist, device, first_frame)
        self._prev_lods = {k[1]: lv for k, lv in goal_lods.items() if k[0] == "poi"}
        stage_ns["lod"] = clock() - t0

        # occlusion: goal extents, greedy upward resolution
        t0 = clock()
        rects: dict[EntityKey, BillboardRect] = {}
        for key in visible_order:
            ext = scene.extent(goal_lods[key]) if key[0] == "poi" else scene.extent(LodLevel.HIGHEST)
            anchor = entity_anchor[key]
            prev_state = self._states.get(key)
            rects[key] = BillboardRect(
                anchor=anchor,
                width=ext.width,
                height=ext.height,
                normal=orient_billboard(anchor, device, prev_state.last_normal if prev_state else None),
            )
        placed, report = resolve_all(
            visible_order,
            rects,
            device,
            margin_frac=self.shift_margin_frac,
            strict=self.strict_occlusion,
        )
        stage_ns["occlusion"] = clock() - t0

        # coherence: retarget changed goals, evaluate, emit
        t0 = clock()
        labels = self._coherence(
            visible_order, placed, goal_lods, supers, decision, device, t_now, first_frame
        )
        stage_ns["coherence"] = clock() - t0

        snap = FrameSnapshot(
            schema=SCHEMA_VERSION,
            frame=self._frame,
            timestamp=t_now,
            device=pose,
            labels=tuple(labels),
            instrumentation=FrameInstrumentation(
                rays_cast=report.rays_cast,
                shift_ops=report.shift_ops,
                labels_shifted=report.labels_shifted,
                stage_us={name: stage_ns.get(name, 0) // 1000 for name in STAGES},
            ),
        )
        self._frame += 1
        return snap

    # -- helpers ------------------------------------------------------------

    def _band_visible(
        self,
        visible_order: Sequence[EntityKey],
        entity_anchor: Mapping[EntityKey, WorldPosition],
        entity_dist: Mapping[EntityKey, float],
        device: WorldPosition,
        first_frame: bool,
    ) -> dict[EntityKey, LodLevel]:
        """Crowding bands for the visible set; supers pin to Highest.

        Widths come from the previous frame's levels.  On the first frame the
        banding iterates to its own fixed point (the dependency only ever
        looks at nearer labels, so this settles) and the engine starts there,
        already converged.
        """
        scene = self._scene
        prev = dict(self._prev_lods)
        for _ in range(len(visible_order) + 1 if first_frame else 1):
            entries = []
            for key in visible_order:
                a = entity_anchor[key]
                d = entity_dist[key]
                if d <= 0.0:
                    entries.append(CrowdingEntry(key, 0.0, 180.0))
                    continue
                azimuth = math.degrees(math.atan2(a.x - device.x, -(a.z - device.z)))
                level = LodLevel.HIGHEST if key[0] == "group" else prev.get(key[1], LodLevel.HIGHEST)
                ext = scene.extent(level)
                entries.append(
                    CrowdingEntry(key, azimuth, math.degrees(2.0 * math.atan(ext.width / 2.0 / d)))
                )
            th = scene.thresholds
            levels, _ = band_crowding(entries, th.t_deg, th.m1_deg, th.m2_deg)
            for key in visible_order:
                if key[0] == "group":
                    levels[key] = LodLevel.HIGHEST
            new_prev = {k[1]: lv for k, lv in levels.items() if k[0] == "poi"}
            if new_prev == prev:
                break
            prev = new_prev
        return levels

    def _ensure_state(
        self, key: EntityKey, goal_pos: WorldPosition, goal_lod: LodLevel, first_frame: bool,
        born_at: Optional[WorldPosition] = None,
    ) -> _EntityState:
        state = self._states.get(key)
        if state is not None:
            return state
        if first_frame:
            # The engine starts settled: no opening animation on frame zero.
            alpha: Union[Transition, float] = 1.0
            pos: Union[Transition, WorldPosition] = goal_pos
            element = {
                e: (1.0 if e in LOD_ELEMENTS[goal_lod] else 0.0) for e in ELEMENTS
            }
        else:
            alpha = 0.0  # appears by fading in
            pos = born_at if born_at is not None else goal_pos
            element = {e: (1.0 if e in LOD_ELEMENTS[goal_lod] else 0.0) for e in ELEMENTS}
        state = _EntityState(pos=pos, label_alpha=alpha, element_alpha=element, lod=goal_lod)
        self._states[key] = state
        return state

    def _animate(self, current, goal, t_now: float):
        """Settled values stay put until the goal moves; transitions retarget."""
        current = _settle(current, t_now)
        scene = self._scene
        if isinstance(current, Transition):
            if current.goal_value == goal:
                return current
            return retarget(current, goal, t_now)
        if current == goal:
            return current
        return Transition(
            start_value=current,
            goal_value=goal,
            t_start=t_now,
            duration_s=scene.transition_duration_s,
            easing=scene.easing,
        )

    def _coherence(
        self,
        visible_order: Sequence[EntityKey],
        placed: Mapping[EntityKey, BillboardRect],
        goal_lods: Mapping[EntityKey, LodLevel],
        supers: Mapping[EntityKey, SuperLabel],
        decision: AggregationDecision,
        device: WorldPosition,
        t_now: float,
        first_frame: bool,
    ) -> list[FrameLabel]:
        scene = self._scene
        pois = scene.poi_by_id()
        groups = scene.group_by_id()
        visible = set(visible_order)

        # Members of a freshly split group re-emerge from the super position,
        # so their states must be seeded before the generic pass below.
        split_origin: dict[EntityKey, WorldPosition] = {}
        for gid, collapsed in decision.aggregated.items():
            if collapsed:
                continue
            sstate = self._states.get(("group", gid))
            if sstate is None:
                continue
            origin = _value(sstate.pos, t_now)
            for mid in groups[gid].member_ids:
                mkey = ("poi", mid)
                if mkey not in self._states:
                    split_origin[mkey] = origin

        # Visible entities move toward their resolved placements at full opacity.
        for key in visible_order:
            goal_pos = placed[key].anchor
            goal_lod = goal_lods[key]
            state = self._ensure_state(key, goal_pos, goal_lod, first_frame, split_origin.get(key))
            state.pos = self._animate(state.pos, goal_pos, t_now)
            state.label_alpha = self._animate(state.label_alpha, 1.0, t_now)
            for element in ELEMENTS:
                target = 1.0 if element in LOD_ELEMENTS[goal_lod] else 0.0
                state.element_alpha[element] = self._animate(state.element_alpha[element], target, t_now)
            state.lod = goal_lod

        # Members collapsing into a super label chase its placement and fade out.
        for skey, sup in supers.items():
            super_goal = placed[skey].anchor
            for mid in sup.member_ids:
                mkey = ("poi", mid)
                state = self._states.get(mkey)
                if state is None:
                    continue  # was already hidden
                state.pos = self._animate(state.pos, super_goal, t_now)
                state.label_alpha = self._animate(state.label_alpha, 0.0, t_now)

        # Supers of split groups fade out where they stand.
        for gid, collapsed in decision.aggregated.items():
            skey = ("group", gid)
            if not collapsed and skey in self._states and skey not in visible:
                sstate = self._states[skey]
                sstate.label_alpha = self._animate(sstate.label_alpha, 0.0, t_now)

        # Evaluate and emit; drop states that fully faded away.
        labels: list[FrameLabel] = []
        dead: list[EntityKey] = []
        for key, state in self._states.items():
            state.pos = _settle(state.pos, t_now)
            state.label_alpha = _settle(state.label_alpha, t_now)
            for element in ELEMENTS:
                state.element_alpha[element] = _settle(state.element_alpha[element], t_now)
            label_alpha = _value(state.label_alpha, t_now)
            if key not in visible and not isinstance(state.label_alpha, Transition) and label_alpha <= 0.0:
                dead.append(key)
                continue
            position = _value(state.pos, t_now)
            normal = orient_billboard(position, device, state.last_normal)
            state.last_normal = normal
            alpha = {
                e: max(0.0, min(1.0, _value(state.element_alpha[e], t_now) * label_alpha))
                for e in ELEMENTS
            }
            if key[0] == "poi":
                poi = pois[key[1]]
                ext = scene.extent(state.lod)
                labels.append(
                    FrameLabel(
                        kind="poi",
                        id=poi.id,
                        name=poi.name,
                        position=position,
                        normal=normal,
                        lod=state.lod,
                        alpha=alpha,
                        color=rgb_to_hex(scalar_to_color(scene.color_scale, poi.scalar_value)),
                        extent=ext,
                        category=poi.category,
                        image_ref=poi.image_ref,
                        scalar_value=poi.scalar_value,
                        scalar_unit=poi.scalar_unit,
                    )
                )
            else:
                gid = key[1]
                group = scene.group_by_id()[gid]
                members = [pois[mid] for mid in group.member_ids]
                mean_value = sum(m.scalar_value for m in members) / len(members)
                legend = tuple(
                    LegendLine(
                        m.name,
                        m.scalar_value,
                        rgb_to_hex(scalar_to_color(scene.color_scale, m.scalar_value)),
                    )
                    for m in members
                )
                labels.append(
                    FrameLabel(
                        kind="super",
                        id=gid,
                        name=group.name,
                        position=position,
                        normal=normal,
                        lod=LodLevel.HIGHEST,
                        alpha=alpha,
                        color=rgb_to_hex(scalar_to_color(scene.color_scale, mean_value)),
                        extent=scene.extent(LodLevel.HIGHEST),
                        scalar_value=mean_value,
                        scalar_unit=members[0].scalar_unit if members else "",
                        aggregate_value=mean_value,
                        legend=legend,
                        member_ids=tuple(group.member_ids),
                    )
                )
        for key in dead:
            del self._states[key]

        labels.sort(key=lambda lab: (lab.kind, lab.id))
        return labels


# ---------------------------------------------------------------------------
# Screen projection
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class ScreenLabel:
    kind: str
    id: str
    x0: float
    y0: float
    x1: float
    y1: float
    depth: float
    off_screen: bool


def project_to_screen(
    snapshot: FrameSnapshot,
    camera: Optional[DevicePose] = None,
    *,
    vfov_deg: float = 60.0,
    viewport: tuple[int, int] = (1280, 720),
) -> list[ScreenLabel]:
    """Project snapshot labels through a pinhole camera into pixel rectangles.

    The camera defaults to the snapshot's own device pose.  Positive yaw
    turns left, positive pitch looks up.  Labels with any corner behind the
    camera plane, or whose projected rectangle misses the viewport entirely,
    come back flagged off-screen.
    """
    cam = camera if camera is not None else snapshot.device
    yaw = math.radians(cam.yaw_deg)
    pitch = math.radians(cam.pitch_deg)
    cp = math.cos(pitch)
    forward = (-math.sin(yaw) * cp, math.sin(pitch), -math.cos(yaw) * cp)
    right = (math.cos(yaw), 0.0, -math.sin(yaw))
    up = (
        right[1] * forward[2] - right[2] * forward[1],
        right[2] * forward[0] - right[0] * forward[2],
        right[0] * forward[1] - right[1] * forward[0],
    )
    vw, vh = viewport
    focal = (vh / 2.0) / math.tan(math.radians(vfov_deg) / 2.0)
    o = cam.position

    out: list[ScreenLabel] = []
    for lab in snapshot.labels:
        rect = BillboardRect(lab.position, lab.extent.width, lab.extent.height, lab.normal)
        xs: list[float] = []
        ys: list[float] = []
        behind = False
        for c in rect.corners():
            v = (c.x - o.x, c.y - o.y, c.z - o.z)
            zc = v[0] * forward[0] + v[1] * forward[1] + v[2] * forward[2]
            if zc <= 1e-9:
                behind = True
                break
            xc = v[0] * right[0] + v[1] * right[1] + v[2] * right[2]
            yc = v[0] * up[0] + v[1] * up[1] + v[2] * up[2]
            xs.append(vw / 2.0 + focal * xc / zc)
            ys.append(vh / 2.0 - focal * yc / zc)
        a = lab.position
        av = (a.x - o.x, a.y - o.y, a.z - o.z)
        depth = av[0] * forward[0] + av[1] * forward[1] + av[2] * forward[2]
        if behind:
            out.append(ScreenLabel(lab.kind, lab.id, 0.0, 0.0, 0.0, 0.0, depth, True))
            continue
        x0, x1 = min(xs), max(xs)
        y0, y1 = min(ys), max(ys)
        off = x1 < 0.0 or y1 < 0.0 or x0 > vw or y0 > vh
        out.append(ScreenLabel(lab.kind, lab.id, x0, y0, x1, y1, depth, off))
    return out
