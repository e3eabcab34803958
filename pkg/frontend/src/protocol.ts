// Wire protocol mirror of the attack server: {type, session_id, sequence, payload}.

export type MessageType =
  | "frame"
  | "mask_update"
  | "config_update"
  | "detections"
  | "adv_frame"
  | "stats"
  | "error";

export interface WireRect {
  x: number;
  y: number;
  w: number;
  h: number;
}

export interface WireBox {
  class_id: number;
  score: number;
  x: number; // center x, frame pixels
  y: number; // center y
  w: number;
  h: number;
}

export interface DetectionsPayload {
  benign_count: number;
  boxes: WireBox[];
  attack_ms: number;
  frame_seq: number;
}

export interface AdvFramePayload {
  width: number;
  height: number;
  encoding: "png-base64";
  data: string;
  frame_seq: number;
}

export interface StatsPayload {
  loss: number;
  iterations_total: number;
  success: boolean;
  frame_seq: number;
}

export interface ErrorPayload {
  code: string;
  message: string;
  frame_seq?: number;
}

export interface MaskUpdatePayload {
  rects: WireRect[];
}

export interface ConfigUpdatePayload {
  mode?: string;
  target_class?: number | null;
  xi?: number;
  alpha?: number;
  monochrome?: boolean;
  channel_source?: string;
  application?: string;
  monochrome_signed?: boolean;
  iters_per_frame?: number;
}

export interface WireMessage {
  type: MessageType;
  session_id: string;
  sequence: number;
  payload: Record<string, unknown>;
}

const SERVER_TYPES: MessageType[] = [
  "detections", "adv_frame", "stats", "error", "mask_update", "config_update",
];

export function makeMessage(
  type: MessageType,
  sessionId: string,
  sequence: number,
  payload: Record<string, unknown>,
): WireMessage {
  return { type, session_id: sessionId, sequence, payload };
}

/** JSON with sorted keys, matching the server's canonical encoding. */
export function canonicalJson(value: unknown): string {
  if (value === null || typeof value !== "object") {
    return JSON.stringify(value);
  }
  if (Array.isArray(value)) {
    return "[" + value.map(canonicalJson).join(",") + "]";
  }
  const obj = value as Record<string, unknown>;
  const keys = Object.keys(obj).sort();
  const body = keys
    .filter((k) => obj[k] !== undefined)
    .map((k) => JSON.stringify(k) + ":" + canonicalJson(obj[k]));
  return "{" + body.join(",") + "}";
}

/** Structural check of an inbound server message; returns null if invalid. */
export function parseServerMessage(text: string): WireMessage | null {
  let obj: unknown;
  try {
    obj = JSON.parse(text);
  } catch {
    return null;
  }
  if (obj === null || typeof obj !== "object" || Array.isArray(obj)) return null;
  const m = obj as Record<string, unknown>;
  if (typeof m.type !== "string" || !SERVER_TYPES.includes(m.type as MessageType)) {
    return null;
  }
  if (typeof m.session_id !== "string" || m.session_id.length === 0) return null;
  if (typeof m.sequence !== "number" || !Number.isInteger(m.sequence) || m.sequence < 1) {
    return null;
  }
  if (m.payload === null || typeof m.payload !== "object" || Array.isArray(m.payload)) {
    return null;
  }
  return m as unknown as WireMessage;
}
