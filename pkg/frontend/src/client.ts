// WebSocket session with the stream service: consumes the hello, keeps only
// the latest snapshot, coalesces outgoing poses to a bounded rate, and
// reconnects with backoff when the server drops. All layout comes from the
// server; the client never re-solves anything.

import {
  type ClientMessage,
  type FrameSnapshot,
  type HelloMessage,
  parseServerMessage,
  SCHEMA_VERSION,
} from "./protocol.js";
import type { PoseMessage } from "./protocol.js";

export type ConnectionStatus = "connecting" | "connected" | "reconnecting" | "incompatible";

/** The subset of the WebSocket API the client touches; injectable in tests. */
export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: (() => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
  onclose: (() => void) | null;
  onerror: (() => void) | null;
}

export type SocketFactory = (url: string) => SocketLike;

export interface ClientHooks {
  onStatus?: (status: ConnectionStatus) => void;
  onHello?: (hello: HelloMessage) => void;
  onSnapshot?: (snap: FrameSnapshot) => void;
  onServerError?: (message: string) => void;
}

export interface ClientOptions {
  socketFactory?: SocketFactory;
  /** Minimum milliseconds between pose sends (default 34 ≈ 30/s). */
  poseIntervalMs?: number;
  reconnectDelayMs?: number;
  now?: () => number;
  schedule?: (fn: () => void, ms: number) => unknown;
}

const defaultFactory: SocketFactory = (url) =>
  new WebSocket(url) as unknown as SocketLike;

export class StreamClient {
  readonly url: string;
  status: ConnectionStatus = "connecting";
  hello: HelloMessage | null = null;
  latestSnapshot: FrameSnapshot | null = null;
  framesSeen = 0;

  private readonly hooks: ClientHooks;
  private readonly factory: SocketFactory;
  private readonly poseIntervalMs: number;
  private readonly reconnectDelayMs: number;
  private readonly now: () => number;
  private readonly schedule: (fn: () => void, ms: number) => unknown;

  private socket: SocketLike | null = null;
  private closed = false;
  private lastPoseSentAt = -Infinity;
  private pendingPose: PoseMessage | null = null;
  private poseFlushScheduled = false;

  constructor(url: string, hooks: ClientHooks = {}, options: ClientOptions = {}) {
    this.url = url;
    this.hooks = hooks;
    this.factory = options.socketFactory ?? defaultFactory;
    this.poseIntervalMs = options.poseIntervalMs ?? 34;
    this.reconnectDelayMs = options.reconnectDelayMs ?? 1000;
    this.now = options.now ?? (() => performance.now());
    this.schedule = options.schedule ?? ((fn, ms) => setTimeout(fn, ms));
  }

  connect(): void {
    if (this.closed) return;
    this.setStatus(this.hello ? "reconnecting" : "connecting");
    const socket = this.factory(this.url);
    this.socket = socket;
    socket.onopen = () => {
      if (this.pendingPose) this.flushPose();
    };
    socket.onmessage = (ev) => this.handleMessage(String(ev.data));
    socket.onerror = () => {
      /* onclose follows and drives the retry */
    };
    socket.onclose = () => {
      this.socket = null;
      if (this.closed || this.status === "incompatible") return;
      this.setStatus("reconnecting");
      this.schedule(() => this.connect(), this.reconnectDelayMs);
    };
  }

  close(): void {
    this.closed = true;
    this.socket?.close();
    this.socket = null;
  }

  /**
   * Queue a pose for sending. Sends immediately when the rate budget allows,
   * otherwise keeps only the newest pose and flushes it when the window
   * reopens — at most one pose per poseIntervalMs reaches the wire.
   */
  sendPose(pose: Omit<PoseMessage, "type">): void {
    this.pendingPose = { type: "pose", ...pose };
    const elapsed = this.now() - this.lastPoseSentAt;
    if (elapsed >= this.poseIntervalMs) {
      this.flushPose();
    } else if (!this.poseFlushScheduled) {
      this.poseFlushScheduled = true;
      this.schedule(() => {
        this.poseFlushScheduled = false;
        this.flushPose();
      }, this.poseIntervalMs - elapsed);
    }
  }

  sendConfig(config: Record<string, unknown>): void {
    this.sendRaw({ type: "config", ...config } as ClientMessage);
  }

  sendPing(): void {
    this.sendRaw({ type: "ping", t: this.now() });
  }

  private flushPose(): void {
    if (!this.pendingPose || !this.socket) return;
    this.sendRaw(this.pendingPose);
    this.pendingPose = null;
    this.lastPoseSentAt = this.now();
  }

  private sendRaw(msg: ClientMessage): void {
    try {
      this.socket?.send(JSON.stringify(msg));
    } catch {
      /* a dying socket will fire onclose and reconnect */
    }
  }

  private handleMessage(text: string): void {
    const msg = parseServerMessage(text);
    if (!msg) return;
    switch (msg.type) {
      case "hello":
        if (msg.schema !== SCHEMA_VERSION) {
          this.setStatus("incompatible");
          this.hooks.onServerError?.(
            `incompatible stream schema ${msg.schema} (viewer speaks ${SCHEMA_VERSION})`,
          );
          this.socket?.close();
          return;
        }
        this.hello = msg;
        this.setStatus("connected");
        this.hooks.onHello?.(msg);
        break;
      case "frame":
        if (this.status !== "connected") return;
        this.latestSnapshot = msg; // latest wins; render loops read this
        this.framesSeen += 1;
        this.hooks.onSnapshot?.(msg);
        break;
      case "error":
        this.hooks.onServerError?.(msg.message);
        break;
      case "pong":
        break;
    }
  }

  private setStatus(status: ConnectionStatus): void {
    if (this.status === status) return;
    this.status = status;
    this.hooks.onStatus?.(status);
  }
}
