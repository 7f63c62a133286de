// Connection/state store for the mixer console. Owns the WebSocket
// lifecycle (reconnect with backoff, re-sync from each new snapshot), the
// per-source view models, slider throttling, and meter decay. All time and
// transport dependencies are injectable so the logic tests headless.

import {
  ServerMessage,
  TrackInfo,
  clampGain,
  parseServerMessage,
  setGainFrame,
} from "./protocol.js";

export interface SourceView {
  id: string;
  kind: string;
  coords: [number, number];
  gain: number; // server-confirmed
  sliderValue: number; // optimistic local value
  active: boolean;
  lastLevelDb: number | null;
  lastLevelAtMs: number | null;
}

export interface WebSocketLike {
  send(data: string): void;
  close(): void;
  onopen: (() => void) | null;
  onmessage: ((event: { data: string }) => void) | null;
  onclose: (() => void) | null;
  onerror: (() => void) | null;
}

export interface SessionOptions {
  url: string;
  wsFactory?: (url: string) => WebSocketLike;
  now?: () => number;
  reconnectBaseMs?: number;
  reconnectMaxMs?: number;
  throttleMs?: number; // min spacing between set_gain sends per slider
}

export type SessionStatus = "connecting" | "open" | "closed";

const METER_DECAY_DB_PER_S = 20;
const METER_FLOOR_DB = -120;

interface PendingGain {
  value: number;
  timer: ReturnType<typeof setTimeout> | null;
}

export class MixerSession {
  readonly sources = new Map<string, SourceView>();
  status: SessionStatus = "closed";
  lastErrorCode: string | null = null;
  streamTime = 0;
  protocolVersion: number | null = null;

  private readonly url: string;
  private readonly wsFactory: (url: string) => WebSocketLike;
  private readonly now: () => number;
  private readonly reconnectBaseMs: number;
  private readonly reconnectMaxMs: number;
  private readonly throttleMs: number;

  private ws: WebSocketLike | null = null;
  private clientSeq = 0;
  private lastServerSeq = -1;
  private reconnectAttempts = 0;
  private reconnectTimer: ReturnType<typeof setTimeout> | null = null;
  private closedByUser = false;
  private readonly pending = new Map<string, PendingGain>();
  private readonly lastSentAt = new Map<string, number>();
  private readonly listeners = new Set<() => void>();
  sentFrames = 0;

  constructor(options: SessionOptions) {
    this.url = options.url;
    this.wsFactory =
      options.wsFactory ?? ((url) => new WebSocket(url) as unknown as WebSocketLike);
    this.now = options.now ?? (() => Date.now());
    this.reconnectBaseMs = options.reconnectBaseMs ?? 250;
    this.reconnectMaxMs = options.reconnectMaxMs ?? 5000;
    this.throttleMs = options.throttleMs ?? 50; // <= 20 msgs/s per slider
  }

  onChange(listener: () => void): () => void {
    this.listeners.add(listener);
    return () => this.listeners.delete(listener);
  }

  private notify(): void {
    for (const listener of this.listeners) listener();
  }

  connect(): void {
    this.closedByUser = false;
    this.openSocket();
  }

  close(): void {
    this.closedByUser = true;
    if (this.reconnectTimer !== null) clearTimeout(this.reconnectTimer);
    this.reconnectTimer = null;
    this.ws?.close();
    this.status = "closed";
    this.notify();
  }

  private openSocket(): void {
    this.status = "connecting";
    this.notify();
    let ws: WebSocketLike;
    try {
      ws = this.wsFactory(this.url);
    } catch {
      this.scheduleReconnect();
      return;
    }
    this.ws = ws;
    ws.onopen = () => {
      this.status = "open";
      this.reconnectAttempts = 0;
      this.lastServerSeq = -1; // fresh server, fresh sequence space
      this.flushPending();
      this.notify();
    };
    ws.onmessage = (event) => this.handleFrame(event.data);
    ws.onclose = () => {
      this.ws = null;
      if (!this.closedByUser) this.scheduleReconnect();
    };
    ws.onerror = () => {
      // onclose follows; nothing extra to do
    };
  }

  private scheduleReconnect(): void {
    this.status = "connecting";
    const delay = Math.min(
      this.reconnectBaseMs * 2 ** this.reconnectAttempts,
      this.reconnectMaxMs,
    );
    this.reconnectAttempts += 1;
    this.notify();
    this.reconnectTimer = setTimeout(() => {
      this.reconnectTimer = null;
      if (!this.closedByUser) this.openSocket();
    }, delay);
  }

  get reconnectDelayMs(): number {
    return Math.min(
      this.reconnectBaseMs * 2 ** Math.max(this.reconnectAttempts - 1, 0),
      this.reconnectMaxMs,
    );
  }

  // ── inbound ──

  private handleFrame(raw: string): void {
    const msg = parseServerMessage(raw);
    if (msg === null) return;
    if (msg.seq <= this.lastServerSeq) return; // stale or duplicate
    this.lastServerSeq = msg.seq;
    switch (msg.type) {
      case "snapshot":
        this.protocolVersion = msg.protocol_version;
        this.streamTime = msg.time;
        this.syncTracks(msg.tracks, true);
        break;
      case "source_list":
        this.streamTime = msg.time;
        this.syncTracks(msg.tracks, false);
        break;
      case "levels":
        this.streamTime = msg.time;
        for (const level of msg.levels) {
          const view = this.sources.get(level.id);
          if (view) {
            view.lastLevelDb = level.rms_db;
            view.lastLevelAtMs = this.now();
          }
        }
        break;
      case "error":
        this.lastErrorCode = msg.code;
        break;
    }
    this.notify();
  }

  private syncTracks(tracks: TrackInfo[], replace: boolean): void {
    const seen = new Set<string>();
    for (const track of tracks) {
      seen.add(track.id);
      const existing = this.sources.get(track.id);
      if (existing) {
        existing.kind = track.kind;
        existing.coords = track.coords;
        existing.gain = track.gain;
        existing.active = track.active;
        // Reconcile the optimistic slider unless a send is still pending.
        if (!this.pending.has(track.id)) {
          existing.sliderValue = track.gain;
        }
      } else {
        this.sources.set(track.id, {
          id: track.id,
          kind: track.kind,
          coords: track.coords,
          gain: track.gain,
          sliderValue: track.gain,
          active: track.active,
          lastLevelDb: null,
          lastLevelAtMs: null,
        });
      }
    }
    if (replace) {
      for (const id of [...this.sources.keys()]) {
        if (!seen.has(id)) this.sources.delete(id);
      }
    }
  }

  // ── outbound ──

  setGain(id: string, value: number): void {
    const clamped = clampGain(value);
    const view = this.sources.get(id);
    if (view) view.sliderValue = clamped; // optimistic echo
    this.queueSend(id, clamped);
    this.notify();
  }

  private queueSend(id: string, value: number): void {
    if (this.status !== "open" || this.ws === null) {
      // Disconnected: remember only the latest value; flushed on reconnect.
      const entry = this.pending.get(id);
      if (entry?.timer != null) clearTimeout(entry.timer);
      this.pending.set(id, { value, timer: null });
      return;
    }
    const last = this.lastSentAt.get(id);
    const nowMs = this.now();
    const entry = this.pending.get(id);
    if (last === undefined || nowMs - last >= this.throttleMs) {
      if (entry?.timer != null) clearTimeout(entry.timer);
      this.pending.delete(id);
      this.sendGain(id, value);
      return;
    }
    // Inside the throttle window: keep the latest value, one trailing send.
    if (entry?.timer != null) {
      entry.value = value;
      return;
    }
    const wait = this.throttleMs - (nowMs - last);
    const pending: PendingGain = { value, timer: null };
    pending.timer = setTimeout(() => {
      pending.timer = null;
      this.pending.delete(id);
      if (this.status === "open" && this.ws !== null) {
        this.sendGain(id, pending.value);
      } else {
        this.pending.set(id, { value: pending.value, timer: null });
      }
    }, wait);
    this.pending.set(id, pending);
  }

  private sendGain(id: string, value: number): void {
    this.ws!.send(setGainFrame(this.clientSeq++, id, value));
    this.lastSentAt.set(id, this.now());
    this.sentFrames += 1;
  }

  private flushPending(): void {
    for (const [id, entry] of [...this.pending.entries()]) {
      if (entry.timer != null) clearTimeout(entry.timer);
      this.pending.delete(id);
      this.sendGain(id, entry.value);
    }
  }

  // ── derived views ──

  meterDb(id: string): number {
    const view = this.sources.get(id);
    if (!view || view.lastLevelDb === null || view.lastLevelAtMs === null) {
      return METER_FLOOR_DB;
    }
    const elapsedS = Math.max(this.now() - view.lastLevelAtMs, 0) / 1000;
    return Math.max(
      view.lastLevelDb - METER_DECAY_DB_PER_S * elapsedS,
      METER_FLOOR_DB,
    );
  }

  stalenessSeconds(id: string): number | null {
    const view = this.sources.get(id);
    if (!view || view.lastLevelAtMs === null) return null;
    return Math.max(this.now() - view.lastLevelAtMs, 0) / 1000;
  }
}
