// Panel-side session state. Never computes attack math: every number shown
// comes from a server message. Out-of-order server messages are dropped via
// the sequence check; displayed mask rects always equal the last
// acknowledged list.

import type {
  AdvFramePayload,
  DetectionsPayload,
  ErrorPayload,
  StatsPayload,
  WireMessage,
  WireRect,
} from "./protocol.js";

export type ConnectionStatus = "disconnected" | "connecting" | "connected";

export interface PanelSnapshot {
  status: ConnectionStatus;
  ackedRects: WireRect[];
  detections: DetectionsPayload | null;
  advFrame: AdvFramePayload | null;
  stats: StatsPayload | null;
  lossHistory: number[];
  lastError: ErrorPayload | null;
  /** adversarial count > benign count on the latest frame */
  success: boolean;
}

export class PanelState {
  status: ConnectionStatus = "disconnected";
  private lastServerSeq = 0;
  private ackedRects: WireRect[] = [];
  private detections: DetectionsPayload | null = null;
  private advFrame: AdvFramePayload | null = null;
  private stats: StatsPayload | null = null;
  private lossHistory: number[] = [];
  private lastError: ErrorPayload | null = null;
  private listeners: Array<(s: PanelSnapshot) => void> = [];

  onChange(listener: (s: PanelSnapshot) => void): void {
    this.listeners.push(listener);
  }

  snapshot(): PanelSnapshot {
    return {
      status: this.status,
      ackedRects: this.ackedRects.map((r) => ({ ...r })),
      detections: this.detections,
      advFrame: this.advFrame,
      stats: this.stats,
      lossHistory: [...this.lossHistory],
      lastError: this.lastError,
      success: this.stats?.success ?? false,
    };
  }

  setStatus(status: ConnectionStatus): void {
    this.status = status;
    this.emit();
  }

  /** Apply a server message; returns false when dropped (out of order). */
  apply(message: WireMessage): boolean {
    if (message.sequence <= this.lastServerSeq) {
      return false;
    }
    this.lastServerSeq = message.sequence;
    switch (message.type) {
      case "detections":
        this.detections = message.payload as unknown as DetectionsPayload;
        break;
      case "adv_frame":
        this.advFrame = message.payload as unknown as AdvFramePayload;
        break;
      case "stats": {
        const stats = message.payload as unknown as StatsPayload;
        this.stats = stats;
        this.lossHistory.push(stats.loss); // append-only, never reordered
        break;
      }
      case "mask_update":
        this.ackedRects = (message.payload.rects as WireRect[]).map((r) => ({ ...r }));
        break;
      case "config_update":
        break; // applied config is displayed straight from the payload by the UI
      case "error":
        this.lastError = message.payload as unknown as ErrorPayload;
        break;
      default:
        return false;
    }
    this.emit();
    return true;
  }

  /** Detections whose frame pairing matches the displayed adversarial frame. */
  pairedDetections(): DetectionsPayload | null {
    if (!this.detections) return null;
    if (this.advFrame && this.advFrame.frame_seq !== this.detections.frame_seq) {
      return null;
    }
    return this.detections;
  }

  private emit(): void {
    const snap = this.snapshot();
    for (const l of this.listeners) l(snap);
  }
}
