"""Device path scripts: timed pose keyframes for offline simulation.

A pose script is a small JSON document listing keyframes at strictly
increasing times; poses between keyframes are linearly interpolated
component-wise.  Yaw values are interpolated exactly as written — a turn
through north should be authored as e.g. 350 -> 370, which normalizes to
the right heading after interpolation.  Before the first keyframe and
after the last, the pose holds steady.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

from .geo import DevicePose
from .scene import SCHEMA_VERSION, SceneFormatError, WorldPosition


@dataclass(frozen=True, slots=True)
class PoseKeyframe:
    t: float
    position: WorldPosition
    yaw_deg: float
    pitch_deg: float


@dataclass(frozen=True, slots=True)
class PoseScript:
    keyframes: tuple[PoseKeyframe, ...]

    @property
    def duration_s(self) -> float:
        return self.keyframes[-1].t


def _keyframe_from_json(obj: dict, t: float, where: str) -> PoseKeyframe:
    try:
        p = obj["position"]
        position = WorldPosition(float(p["x"]), float(p.get("y", 0.0)), float(p["z"]))
        yaw = float(obj.get("yaw_deg", 0.0))
        pitch = float(obj.get("pitch_deg", 0.0))
    except (KeyError, TypeError, ValueError) as exc:
        raise SceneFormatError(f"{where}: keyframe needs position.x/z and numeric angles") from exc
    if not (position.is_finite() and math.isfinite(yaw) and math.isfinite(pitch)):
        raise SceneFormatError(f"{where}: keyframe values must be finite")
    return PoseKeyframe(t=t, position=position, yaw_deg=yaw, pitch_deg=pitch)


def posescript_from_json(doc: object) -> PoseScript:
    if not isinstance(doc, dict):
        raise SceneFormatError("pose script must be a JSON object")
    if doc.get("schema") != SCHEMA_VERSION:
        raise SceneFormatError(f"unsupported pose script schema {doc.get('schema')!r}, expected {SCHEMA_VERSION}")
    raw = doc.get("keyframes")
    if not isinstance(raw, list) or not raw:
        raise SceneFormatError("pose script needs a non-empty keyframes list")
    frames: list[PoseKeyframe] = []
    for i, kf in enumerate(raw):
        if not isinstance(kf, dict) or "t" not in kf:
            raise SceneFormatError(f"keyframes[{i}]: each keyframe needs a time t")
        t = float(kf["t"])
        if not math.isfinite(t) or t < 0.0:
            raise SceneFormatError(f"keyframes[{i}]: time must be finite and >= 0, got {t}")
        if frames and t <= frames[-1].t:
            raise SceneFormatError(f"keyframes[{i}]: times must be strictly increasing ({frames[-1].t} then {t})")
        frames.append(_keyframe_from_json(kf, t, f"keyframes[{i}]"))
    return PoseScript(keyframes=tuple(frames))


def load_posescript(path: str | Path) -> PoseScript:
    text = Path(path).read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SceneFormatError(f"{path}: not valid JSON: {exc}") from exc
    return posescript_from_json(doc)


def _lerp(a: float, b: float, f: float) -> float:
    return a + (b - a) * f


def pose_at(script: PoseScript, t: float) -> DevicePose:
    """Pose at time t: held outside the keyframe range, lerped inside it."""
    frames = script.keyframes

    def to_pose(kf: PoseKeyframe) -> DevicePose:
        return DevicePose(position=kf.position, yaw_deg=kf.yaw_deg, pitch_deg=kf.pitch_deg)

    if t <= frames[0].t:
        return to_pose(frames[0])
    if t >= frames[-1].t:
        return to_pose(frames[-1])
    for a, b in zip(frames, frames[1:]):
        if a.t <= t <= b.t:
            f = (t - a.t) / (b.t - a.t)
            return DevicePose(
                position=WorldPosition(
                    _lerp(a.position.x, b.position.x, f),
                    _lerp(a.position.y, b.position.y, f),
                    _lerp(a.position.z, b.position.z, f),
                ),
                yaw_deg=_lerp(a.yaw_deg, b.yaw_deg, f),
                pitch_deg=_lerp(a.pitch_deg, b.pitch_deg, f),
            )
    raise AssertionError("unreachable: keyframe scan covers the full range")
