// Shared wire-shaped fixtures, matching the service's JSON byte-for-byte in
// structure (field names, enum casing, color format).

import type { FrameMessage, HelloMessage, LabelRecord } from "../src/protocol.js";

export function poiLabel(overrides: Partial<LabelRecord> = {}): LabelRecord {
  return {
    kind: "poi",
    poi_id: "p01",
    name: "Harbor Swing",
    category: "thrilling",
    position: { x: 0, y: 0, z: -40 },
    normal: { x: 0, y: 0, z: 1 },
    extent: { width: 120, height: 140 },
    lod: "Highest",
    alpha: { rectangle: 1, icon: 1, image: 1, text: 1 },
    color: "#FF0000",
    scalar_value: 35,
    scalar_unit: "min",
    image_ref: "harbor-swing",
    ...overrides,
  };
}

export function superLabel(overrides: Partial<LabelRecord> = {}): LabelRecord {
  return {
    ...poiLabel(),
    kind: "super",
    poi_id: undefined,
    group_id: "harbor-gate",
    name: "Harbor Gate Plaza",
    aggregate_value: 24,
    member_ids: ["p01", "p02", "p03"],
    legend: [
      { poi_id: "p01", name: "Harbor Swing", value: 35, color: "#FF4444" },
      { poi_id: "p02", name: "Tide Runner", value: 20, color: "#FF8888" },
      { poi_id: "p03", name: "Gull Drop", value: 17, color: "#FFAAAA" },
    ],
    ...overrides,
  };
}

export function frameMessage(labels: LabelRecord[] = [poiLabel()]): FrameMessage {
  return {
    type: "frame",
    schema: 1,
    frame: 7,
    timestamp: 0.2333,
    device: { position: { x: 0, y: 1.6, z: 0 }, yaw_deg: 0, pitch_deg: 0 },
    labels,
    instrumentation: {
      rays_cast: 48,
      shifts: 2,
      labels_shifted: 1,
      stage_us: { input: 10, positioning: 20, occlusion: 30, lod: 15, coherence: 9 },
    },
  };
}

export function helloMessage(schema = 1): HelloMessage {
  return {
    type: "hello",
    schema,
    server: "arlabels/0.1.0",
    fps: 30,
    scene: {
      name: "theme-park",
      poi_count: 35,
      group_count: 7,
      transition_duration_s: 1.0,
      easing: "sine-in-out",
      thresholds: { t_deg: 45, m1_deg: 20, m2_deg: 30 },
    },
  };
}
