// Pinhole projection of world-space billboards into canvas pixels.
// Camera: yaw 0 faces -z, positive pitch looks up; screen x grows right,
// y grows down; the vertical field of view fixes the focal length.

import type { LabelRecord, Vec3 } from "./protocol.js";
import type { Pose } from "./camera.js";

const DEG = Math.PI / 180;

export interface ScreenPoint {
  x: number;
  y: number;
  depth: number; // distance along the camera forward axis, world units
}

export interface ProjectedLabel {
  label: LabelRecord;
  corners: [ScreenPoint, ScreenPoint, ScreenPoint, ScreenPoint]; // bl, br, tl, tr
  depth: number; // anchor depth, for painter's ordering
  offScreen: boolean;
}

export interface Camera {
  pose: Pose;
  vfovDeg: number;
  width: number;
  height: number;
}

/** World-space corners of a billboard: bottom-left/right, top-left/right. */
export function billboardCorners(label: LabelRecord): [Vec3, Vec3, Vec3, Vec3] {
  const a = label.position;
  const n = label.normal;
  const hw = label.extent.width / 2;
  const h = label.extent.height;
  const rx = -n.z; // horizontal right vector of the facing rectangle
  const rz = n.x;
  return [
    { x: a.x - hw * rx, y: a.y, z: a.z - hw * rz },
    { x: a.x + hw * rx, y: a.y, z: a.z + hw * rz },
    { x: a.x - hw * rx, y: a.y + h, z: a.z - hw * rz },
    { x: a.x + hw * rx, y: a.y + h, z: a.z + hw * rz },
  ];
}

export function projectPoint(p: Vec3, cam: Camera): ScreenPoint {
  const { pose } = cam;
  const dx = p.x - pose.x;
  const dy = p.y - pose.y;
  const dz = p.z - pose.z;
  const yaw = pose.yawDeg * DEG;
  const pitch = pose.pitchDeg * DEG;
  // Rotate world delta into camera axes (right, up, forward).
  const cy = Math.cos(yaw);
  const sy = Math.sin(yaw);
  const xr = cy * dx + sy * dz; // along camera right before pitch
  const zf = sy * dx - cy * dz; // along yaw-forward (toward -z at yaw 0)
  const cp = Math.cos(pitch);
  const sp = Math.sin(pitch);
  const yu = cp * dy - sp * zf; // camera up
  const zc = cp * zf + sp * dy; // camera forward depth
  const focal = cam.height / 2 / Math.tan((cam.vfovDeg / 2) * DEG);
  if (zc <= 1e-9) {
    return { x: Number.NaN, y: Number.NaN, depth: zc };
  }
  return {
    x: cam.width / 2 + (xr / zc) * focal,
    y: cam.height / 2 - (yu / zc) * focal,
    depth: zc,
  };
}

export function projectLabel(label: LabelRecord, cam: Camera): ProjectedLabel {
  const world = billboardCorners(label);
  const corners = world.map((c) => projectPoint(c, cam)) as ProjectedLabel["corners"];
  const anchorDepth = projectPoint(label.position, cam).depth;
  const margin = Math.max(cam.width, cam.height); // generous: partly visible still draws
  const offScreen =
    corners.every((c) => c.depth <= 0) ||
    corners.some((c) => Number.isNaN(c.x)) ||
    corners.every((c) => c.x < -margin || c.x > cam.width + margin) ||
    corners.every((c) => c.y < -margin || c.y > cam.height + margin);
  return { label, corners, depth: anchorDepth, offScreen };
}

/** Project every label and order far-to-near for painter's-algorithm drawing. */
export function projectScene(labels: LabelRecord[], cam: Camera): ProjectedLabel[] {
  return labels
    .map((label) => projectLabel(label, cam))
    .filter((p) => !p.offScreen)
    .sort((a, b) => b.depth - a.depth);
}
