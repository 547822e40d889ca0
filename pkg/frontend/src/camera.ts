// First-person pose state. Yaw 0 faces -z (matching the engine's azimuth
// convention), positive yaw turns clockwise when seen from above, positive
// pitch looks up. Movement stays on the ground plane: steering never changes
// the eye height, and pitch never enters the movement direction.

export interface Pose {
  x: number;
  y: number;
  z: number;
  yawDeg: number;
  pitchDeg: number;
}

export interface SteerKeys {
  forward: boolean;
  back: boolean;
  left: boolean;
  right: boolean;
}

export const EYE_HEIGHT = 1.6;
export const WALK_SPEED = 40.0; // world units per second
export const LOOK_SENSITIVITY = 0.25; // degrees per pixel dragged
export const PITCH_LIMIT_DEG = 89.0;

const DEG = Math.PI / 180;

export function normalizeYaw(yawDeg: number): number {
  const y = yawDeg % 360;
  return y < 0 ? y + 360 : y;
}

/** Unit ground-plane facing direction for a yaw. */
export function facing(yawDeg: number): { x: number; z: number } {
  return { x: Math.sin(yawDeg * DEG), z: -Math.cos(yawDeg * DEG) };
}

/** Advance the pose by held keys over dt seconds; y is untouched. */
export function stepPose(pose: Pose, keys: SteerKeys, dtS: number, speed = WALK_SPEED): Pose {
  let ahead = 0;
  let side = 0;
  if (keys.forward) ahead += 1;
  if (keys.back) ahead -= 1;
  if (keys.right) side += 1;
  if (keys.left) side -= 1;
  if (ahead === 0 && side === 0) return pose;
  const norm = Math.hypot(ahead, side);
  const f = facing(pose.yawDeg);
  const rightX = -f.z; // right-hand strafe direction on the ground plane
  const rightZ = f.x;
  const step = (speed * dtS) / norm;
  return {
    ...pose,
    x: pose.x + step * (ahead * f.x + side * rightX),
    z: pose.z + step * (ahead * f.z + side * rightZ),
  };
}

/** Apply a mouse drag of (dxPx, dyPx): yaw right, pitch up, pitch clamped. */
export function dragLook(pose: Pose, dxPx: number, dyPx: number, sensitivity = LOOK_SENSITIVITY): Pose {
  const pitch = Math.max(
    -PITCH_LIMIT_DEG,
    Math.min(PITCH_LIMIT_DEG, pose.pitchDeg - dyPx * sensitivity),
  );
  return { ...pose, yawDeg: normalizeYaw(pose.yawDeg + dxPx * sensitivity), pitchDeg: pitch };
}
