// Wire types for the arlabels stream service. One port, two framings; the
// browser always uses the WebSocket framing, one JSON message per text frame.

export const SCHEMA_VERSION = 1;

export interface Vec3 {
  x: number;
  y: number;
  z: number;
}

export type LodName = "Lowest" | "Middle" | "Highest";

/** Which billboard elements a detail level may show. */
export const LOD_ELEMENTS: Record<LodName, ReadonlyArray<ElementName>> = {
  Lowest: ["rectangle", "icon"],
  Middle: ["rectangle", "icon", "image"],
  Highest: ["rectangle", "icon", "image", "text"],
};

export type ElementName = "rectangle" | "icon" | "image" | "text";

export interface ElementAlpha {
  rectangle: number;
  icon: number;
  image: number;
  text: number;
}

export interface LegendRow {
  poi_id: string;
  name: string;
  value: number;
  color: string;
}

export interface LabelRecord {
  kind: "poi" | "super";
  name: string;
  category: string;
  position: Vec3; // world-space bottom-center anchor
  normal: Vec3; // unit, horizontal, toward the device
  extent: { width: number; height: number };
  lod: LodName;
  alpha: ElementAlpha;
  color: string; // "#RRGGBB"
  scalar_value: number;
  scalar_unit: string;
  image_ref: string;
  poi_id?: string;
  group_id?: string;
  aggregate_value?: number;
  member_ids?: string[];
  legend?: LegendRow[];
}

export interface DeviceState {
  position: Vec3;
  yaw_deg: number;
  pitch_deg: number;
}

export interface Instrumentation {
  rays_cast: number;
  shifts: number;
  labels_shifted: number;
  stage_us: Record<string, number>;
}

export interface FrameSnapshot {
  schema: number;
  frame: number;
  timestamp: number;
  device: DeviceState;
  labels: LabelRecord[];
  instrumentation: Instrumentation;
}

export interface SceneSummary {
  name: string;
  poi_count: number;
  group_count: number;
  transition_duration_s: number;
  easing: string;
  thresholds: { t_deg: number; m1_deg: number; m2_deg: number };
}

export interface HelloMessage {
  type: "hello";
  schema: number;
  server: string;
  fps: number;
  scene: SceneSummary;
}

export interface FrameMessage extends FrameSnapshot {
  type: "frame";
}

export interface ErrorMessage {
  type: "error";
  schema: number;
  message: string;
}

export interface PongMessage {
  type: "pong";
  schema: number;
  t?: number;
}

export type ServerMessage = HelloMessage | FrameMessage | ErrorMessage | PongMessage;

export interface PoseMessage {
  type: "pose";
  position: Vec3;
  yaw_deg: number;
  pitch_deg: number;
}

export interface ConfigMessage {
  type: "config";
  t_deg?: number;
  m1_deg?: number;
  m2_deg?: number;
  transition_duration_s?: number;
  easing?: string;
}

export interface PingMessage {
  type: "ping";
  t?: number;
}

export type ClientMessage = PoseMessage | ConfigMessage | PingMessage;

/** The easing names the engine accepts, for the settings dropdown. */
export const EASING_NAMES = [
  "linear",
  "sine-in",
  "sine-out",
  "sine-in-out",
  "quad-in",
  "quad-out",
  "quad-in-out",
  "cubic-in",
  "cubic-out",
  "cubic-in-out",
] as const;

function isVec3(v: unknown): v is Vec3 {
  return (
    typeof v === "object" &&
    v !== null &&
    typeof (v as Vec3).x === "number" &&
    typeof (v as Vec3).y === "number" &&
    typeof (v as Vec3).z === "number"
  );
}

function isAlpha(a: unknown): a is ElementAlpha {
  if (typeof a !== "object" || a === null) return false;
  const rec = a as Record<string, unknown>;
  return ["rectangle", "icon", "image", "text"].every((k) => typeof rec[k] === "number");
}

function isLabel(l: unknown): l is LabelRecord {
  if (typeof l !== "object" || l === null) return false;
  const rec = l as Record<string, unknown>;
  return (
    (rec.kind === "poi" || rec.kind === "super") &&
    typeof rec.name === "string" &&
    isVec3(rec.position) &&
    isVec3(rec.normal) &&
    typeof rec.extent === "object" &&
    rec.extent !== null &&
    typeof (rec.extent as { width: unknown }).width === "number" &&
    typeof (rec.extent as { height: unknown }).height === "number" &&
    (rec.lod === "Lowest" || rec.lod === "Middle" || rec.lod === "Highest") &&
    isAlpha(rec.alpha) &&
    typeof rec.color === "string"
  );
}

/** Structural check before rendering; a bad snapshot is skipped, not fatal. */
export function isValidSnapshot(msg: unknown): msg is FrameSnapshot {
  if (typeof msg !== "object" || msg === null) return false;
  const rec = msg as Record<string, unknown>;
  return (
    typeof rec.frame === "number" &&
    typeof rec.timestamp === "number" &&
    typeof rec.device === "object" &&
    rec.device !== null &&
    isVec3((rec.device as DeviceState).position) &&
    Array.isArray(rec.labels) &&
    rec.labels.every(isLabel) &&
    typeof rec.instrumentation === "object" &&
    rec.instrumentation !== null
  );
}

/**
 * Parse one wire message. Returns null (with a console diagnostic) for
 * anything that is not a well-formed server message; the session survives.
 */
export function parseServerMessage(text: string): ServerMessage | null {
  let doc: unknown;
  try {
    doc = JSON.parse(text);
  } catch {
    console.warn("viewer: dropping non-JSON message");
    return null;
  }
  if (typeof doc !== "object" || doc === null) {
    console.warn("viewer: dropping non-object message");
    return null;
  }
  const msg = doc as { type?: unknown };
  switch (msg.type) {
    case "hello":
      return doc as HelloMessage;
    case "frame":
      if (!isValidSnapshot(doc)) {
        console.warn("viewer: dropping malformed frame snapshot");
        return null;
      }
      return doc as FrameMessage;
    case "error":
      return doc as ErrorMessage;
    case "pong":
      return doc as PongMessage;
    default:
      console.warn("viewer: dropping message with unknown type", msg.type);
      return null;
  }
}
