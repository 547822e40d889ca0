// The interactive viewer: steers a virtual device through the scene with
// WASD + mouse drag, sends coalesced poses, and renders the newest snapshot
// each animation frame. Layout is entirely server-side — this file only
// moves the camera and draws what arrives.

import { dragLook, EYE_HEIGHT, normalizeYaw, type Pose, type SteerKeys, stepPose } from "./camera.js";
import { StreamClient } from "./client.js";
import { EASING_NAMES, type FrameSnapshot, type HelloMessage } from "./protocol.js";
import { type Camera, projectScene } from "./projection.js";
import { drawInstrumentation, drawLabel, type LodOverride, type RenderSettings } from "./renderer.js";

export interface ViewerState {
  status: string;
  pose: Pose;
  settings: RenderSettings;
  snapshot: FrameSnapshot | null;
}

const VFOV_DEG = 55;

export class Viewer {
  readonly client: StreamClient;
  readonly state: ViewerState;

  private readonly canvas: HTMLCanvasElement;
  private readonly ctx: CanvasRenderingContext2D;
  private readonly header: HTMLElement;
  private readonly banner: HTMLElement;
  private readonly keys: SteerKeys = { forward: false, back: false, left: false, right: false };
  private dragging = false;
  private lastFrameAt = 0;
  private renderedFrames = 0;
  private fpsWindowStart = 0;
  private measuredFps = 0;
  private poseDirty = true;

  constructor(root: HTMLElement, url: string) {
    this.state = {
      status: "connecting",
      pose: { x: 0, y: EYE_HEIGHT, z: 0, yawDeg: 0, pitchDeg: 0 },
      settings: { showInstrumentation: false, lodOverride: "auto" },
      snapshot: null,
    };

    root.innerHTML = "";
    this.header = el("div", "viewer-header");
    this.banner = el("div", "viewer-banner");
    this.banner.style.display = "none";
    this.canvas = document.createElement("canvas");
    this.canvas.className = "viewer-canvas";
    this.canvas.width = 1280;
    this.canvas.height = 720;
    this.canvas.tabIndex = 0;
    const panel = this.buildSettingsPanel();
    root.append(this.header, this.banner, this.canvas, panel);
    const ctx = this.canvas.getContext("2d");
    if (!ctx) throw new Error("canvas 2d context unavailable");
    this.ctx = ctx;

    this.client = new StreamClient(url, {
      onStatus: (status) => {
        this.state.status = status;
        this.refreshHeader();
        if (status === "reconnecting") this.showBanner("connection lost — retrying…");
        else if (status === "connected") this.hideBanner();
      },
      onHello: (hello) => this.onHello(hello),
      onServerError: (message) => this.showBanner(message),
    });

    this.bindInput();
    this.refreshHeader();
  }

  start(): void {
    this.client.connect();
    this.lastFrameAt = performance.now();
    this.fpsWindowStart = this.lastFrameAt;
    requestAnimationFrame((t) => this.tick(t));
  }

  private onHello(hello: HelloMessage): void {
    this.refreshHeader();
    const easing = document.getElementById("set-easing") as HTMLSelectElement | null;
    if (easing) easing.value = hello.scene.easing;
    const duration = document.getElementById("set-duration") as HTMLInputElement | null;
    if (duration) duration.value = String(hello.scene.transition_duration_s);
    for (const [id, value] of [
      ["set-t", hello.scene.thresholds.t_deg],
      ["set-m1", hello.scene.thresholds.m1_deg],
      ["set-m2", hello.scene.thresholds.m2_deg],
    ] as const) {
      const input = document.getElementById(id) as HTMLInputElement | null;
      if (input) input.value = String(value);
    }
  }

  private tick(tMs: number): void {
    const dt = Math.min(0.1, (tMs - this.lastFrameAt) / 1000);
    this.lastFrameAt = tMs;

    const before = this.state.pose;
    this.state.pose = stepPose(before, this.keys, dt);
    if (this.state.pose !== before) this.poseDirty = true;
    if (this.poseDirty) {
      const p = this.state.pose;
      this.client.sendPose({
        position: { x: p.x, y: p.y, z: p.z },
        yaw_deg: p.yawDeg,
        pitch_deg: p.pitchDeg,
      });
      this.poseDirty = false;
    }

    this.state.snapshot = this.client.latestSnapshot;
    this.render();

    this.renderedFrames += 1;
    if (tMs - this.fpsWindowStart >= 1000) {
      this.measuredFps = (this.renderedFrames * 1000) / (tMs - this.fpsWindowStart);
      this.renderedFrames = 0;
      this.fpsWindowStart = tMs;
    }
    requestAnimationFrame((t) => this.tick(t));
  }

  private render(): void {
    const { ctx, canvas } = this;
    ctx.fillStyle = "#dce7f2";
    ctx.fillRect(0, 0, canvas.width, canvas.height / 2);
    ctx.fillStyle = "#e8e4d8";
    ctx.fillRect(0, canvas.height / 2, canvas.width, canvas.height / 2);

    const snap = this.state.snapshot;
    if (!snap) return;
    const cam: Camera = {
      pose: this.state.pose,
      vfovDeg: VFOV_DEG,
      width: canvas.width,
      height: canvas.height,
    };
    for (const projected of projectScene(snap.labels, cam)) {
      drawLabel(ctx, projected, this.state.settings);
    }
    if (this.state.settings.showInstrumentation) {
      const inst = snap.instrumentation;
      const stages = Object.entries(inst.stage_us)
        .map(([name, us]) => `${name} ${us}us`)
        .join("  ");
      drawInstrumentation(ctx, [
        `render ${this.measuredFps.toFixed(0)} fps  frame #${snap.frame}`,
        `rays ${inst.rays_cast}  shifts ${inst.shifts}  moved ${inst.labels_shifted}`,
        ...stages.match(/.{1,34}(\s|$)/g) ?? [],
      ]);
    }
  }

  private refreshHeader(): void {
    const hello = this.client.hello;
    const scene = hello
      ? `${hello.scene.name} — ${hello.scene.poi_count} POIs, ${hello.scene.group_count} groups @ ${hello.fps} fps`
      : "no scene yet";
    this.header.textContent = `arlabels viewer · ${scene} · ${this.state.status}`;
  }

  private showBanner(text: string): void {
    this.banner.textContent = text;
    this.banner.style.display = "block";
  }

  private hideBanner(): void {
    this.banner.style.display = "none";
  }

  private bindInput(): void {
    const keyMap: Record<string, keyof SteerKeys> = {
      KeyW: "forward",
      ArrowUp: "forward",
      KeyS: "back",
      ArrowDown: "back",
      KeyA: "left",
      ArrowLeft: "left",
      KeyD: "right",
      ArrowRight: "right",
    };
    this.canvas.addEventListener("keydown", (ev) => {
      const key = keyMap[ev.code];
      if (key) {
        this.keys[key] = true;
        ev.preventDefault();
      }
    });
    this.canvas.addEventListener("keyup", (ev) => {
      const key = keyMap[ev.code];
      if (key) this.keys[key] = false;
    });
    this.canvas.addEventListener("mousedown", () => {
      this.dragging = true;
      this.canvas.focus();
    });
    window.addEventListener("mouseup", () => (this.dragging = false));
    window.addEventListener("mousemove", (ev) => {
      if (!this.dragging) return;
      this.state.pose = dragLook(this.state.pose, ev.movementX, ev.movementY);
      this.state.pose.yawDeg = normalizeYaw(this.state.pose.yawDeg);
      this.poseDirty = true;
    });
  }

  private buildSettingsPanel(): HTMLElement {
    const panel = el("div", "viewer-panel");
    panel.innerHTML = `
      <label>t° <input id="set-t" type="number" step="1" value="45"></label>
      <label>m1° <input id="set-m1" type="number" step="1" value="20"></label>
      <label>m2° <input id="set-m2" type="number" step="1" value="30"></label>
      <label>duration s <input id="set-duration" type="number" step="0.1" value="1.0"></label>
      <label>easing <select id="set-easing">${EASING_NAMES.map((n) => `<option>${n}</option>`).join("")}</select></label>
      <button id="set-apply">apply</button>
      <label>LOD override
        <select id="set-lod">
          <option value="auto">auto</option><option>Lowest</option>
          <option>Middle</option><option>Highest</option>
        </select>
      </label>
      <label><input id="set-inst" type="checkbox"> instrumentation</label>
    `;
    panel.querySelector("#set-apply")?.addEventListener("click", () => {
      const num = (id: string) =>
        Number((panel.querySelector(`#${id}`) as HTMLInputElement).value);
      this.client.sendConfig({
        t_deg: num("set-t"),
        m1_deg: num("set-m1"),
        m2_deg: num("set-m2"),
        transition_duration_s: num("set-duration"),
        easing: (panel.querySelector("#set-easing") as HTMLSelectElement).value,
      });
    });
    panel.querySelector("#set-lod")?.addEventListener("change", (ev) => {
      this.state.settings.lodOverride = (ev.target as HTMLSelectElement).value as LodOverride;
    });
    panel.querySelector("#set-inst")?.addEventListener("change", (ev) => {
      this.state.settings.showInstrumentation = (ev.target as HTMLInputElement).checked;
    });
    return panel;
  }
}

function el(tag: string, className: string): HTMLElement {
  const node = document.createElement(tag);
  node.className = className;
  return node;
}
