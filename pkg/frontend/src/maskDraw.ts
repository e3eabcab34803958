// Pointer-driven mask editing: click-drag adds a rectangle, alt-click (or
// delete mode) removes one, clear empties the list. Produces one
// mask_update payload per committed edit. The state machine is DOM-free:
// the browser layer feeds it plain display-space points.

import { rectContains, rectFromDrag, type DisplayPoint } from "./geometry.js";
import type { MaskUpdatePayload, WireRect } from "./protocol.js";

export interface MaskEditorOptions {
  frameWidth: number;
  frameHeight: number;
  /** display pixels per frame pixel, e.g. 2 when the canvas is shown at 2x */
  displayScale: number;
}

export class MaskEditor {
  private rects: WireRect[] = [];
  private dragStart: DisplayPoint | null = null;
  private dragCurrent: DisplayPoint | null = null;
  readonly options: MaskEditorOptions;

  constructor(options: MaskEditorOptions) {
    this.options = options;
  }

  setDisplayScale(scale: number): void {
    this.options.displayScale = scale;
  }

  /** Rectangles currently drawn (frame coordinates). */
  currentRects(): WireRect[] {
    return this.rects.map((r) => ({ ...r }));
  }

  /** In-progress drag rectangle for live preview, if any. */
  pendingRect(): WireRect | null {
    if (!this.dragStart || !this.dragCurrent) return null;
    return rectFromDrag(
      this.dragStart,
      this.dragCurrent,
      this.options.displayScale,
      this.options.frameWidth,
      this.options.frameHeight,
    );
  }

  pointerDown(p: DisplayPoint): void {
    this.dragStart = p;
    this.dragCurrent = p;
  }

  pointerMove(p: DisplayPoint): void {
    if (this.dragStart) this.dragCurrent = p;
  }

  /** Finish a drag; returns the payload to send, or null for a no-op drag. */
  pointerUp(p: DisplayPoint): MaskUpdatePayload | null {
    if (!this.dragStart) return null;
    const rect = rectFromDrag(
      this.dragStart,
      p,
      this.options.displayScale,
      this.options.frameWidth,
      this.options.frameHeight,
    );
    this.dragStart = null;
    this.dragCurrent = null;
    if (!rect) return null;
    this.rects.push(rect);
    return this.payload();
  }

  /** Remove the topmost rectangle under the point; null if none hit. */
  deleteAt(p: DisplayPoint): MaskUpdatePayload | null {
    const fp = {
      x: Math.round(p.x / this.options.displayScale),
      y: Math.round(p.y / this.options.displayScale),
    };
    for (let i = this.rects.length - 1; i >= 0; i--) {
      if (rectContains(this.rects[i], fp)) {
        this.rects.splice(i, 1);
        return this.payload();
      }
    }
    return null;
  }

  clearAll(): MaskUpdatePayload {
    this.rects = [];
    return this.payload();
  }

  /** Replace local rects with the server-acknowledged list. */
  applyAck(rects: WireRect[]): void {
    this.rects = rects.map((r) => ({ ...r }));
  }

  private payload(): MaskUpdatePayload {
    return { rects: this.currentRects() };
  }
}
