// Wire types for the control protocol: one JSON object per WebSocket text
// frame, strictly increasing server `seq`.

export const GAIN_MIN = 0;
export const GAIN_MAX = 10;

export interface TrackInfo {
  id: string;
  kind: string;
  coords: [number, number];
  gain: number;
  active: boolean;
}

export interface LevelInfo {
  id: string;
  rms_db: number;
}

export interface SnapshotMessage {
  type: "snapshot";
  seq: number;
  protocol_version: number;
  time: number;
  tracks: TrackInfo[];
}

export interface SourceListMessage {
  type: "source_list";
  seq: number;
  time: number;
  tracks: TrackInfo[];
}

export interface LevelsMessage {
  type: "levels";
  seq: number;
  time: number;
  levels: LevelInfo[];
}

export interface ErrorMessage {
  type: "error";
  seq: number;
  code: string;
  detail: string;
}

export type ServerMessage =
  | SnapshotMessage
  | SourceListMessage
  | LevelsMessage
  | ErrorMessage;

export function clampGain(value: number): number {
  if (!Number.isFinite(value)) return 1;
  return Math.min(Math.max(value, GAIN_MIN), GAIN_MAX);
}

function isTrack(obj: unknown): obj is TrackInfo {
  const t = obj as TrackInfo;
  return (
    typeof t === "object" &&
    t !== null &&
    typeof t.id === "string" &&
    typeof t.kind === "string" &&
    Array.isArray(t.coords) &&
    t.coords.length === 2 &&
    t.coords.every((c) => typeof c === "number") &&
    typeof t.gain === "number" &&
    typeof t.active === "boolean"
  );
}

function isLevel(obj: unknown): obj is LevelInfo {
  const l = obj as LevelInfo;
  return (
    typeof l === "object" &&
    l !== null &&
    typeof l.id === "string" &&
    typeof l.rms_db === "number"
  );
}

export function parseServerMessage(raw: string): ServerMessage | null {
  let msg: unknown;
  try {
    msg = JSON.parse(raw);
  } catch {
    return null;
  }
  const m = msg as Record<string, unknown>;
  if (typeof m !== "object" || m === null || typeof m.seq !== "number") {
    return null;
  }
  switch (m.type) {
    case "snapshot":
      if (Array.isArray(m.tracks) && m.tracks.every(isTrack)) {
        return m as unknown as SnapshotMessage;
      }
      return null;
    case "source_list":
      if (Array.isArray(m.tracks) && m.tracks.every(isTrack)) {
        return m as unknown as SourceListMessage;
      }
      return null;
    case "levels":
      if (Array.isArray(m.levels) && m.levels.every(isLevel)) {
        return m as unknown as LevelsMessage;
      }
      return null;
    case "error":
      if (typeof m.code === "string") {
        return m as unknown as ErrorMessage;
      }
      return null;
    default:
      return null;
  }
}

export function setGainFrame(seq: number, id: string, gain: number): string {
  return JSON.stringify({ type: "set_gain", seq, id, gain: clampGain(gain) });
}
