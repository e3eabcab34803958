// Coordinate mapping between the displayed canvas and detector-frame pixels.
// All wire rectangles live in frame coordinates; the display scale is
// inverted before anything is put on the wire.

import type { WireBox, WireRect } from "./protocol.js";

export interface DisplayPoint {
  x: number;
  y: number;
}

/** Display pixels -> integer frame pixels (inverse of the display scaling). */
export function toFramePoint(p: DisplayPoint, scale: number): DisplayPoint {
  if (scale <= 0) throw new Error(`display scale must be positive, got ${scale}`);
  return { x: Math.round(p.x / scale), y: Math.round(p.y / scale) };
}

/** Normalized integer rect from a drag between two display points. */
export function rectFromDrag(
  start: DisplayPoint,
  end: DisplayPoint,
  scale: number,
  frameWidth: number,
  frameHeight: number,
): WireRect | null {
  const a = toFramePoint(start, scale);
  const b = toFramePoint(end, scale);
  const x0 = Math.max(0, Math.min(a.x, b.x));
  const y0 = Math.max(0, Math.min(a.y, b.y));
  const x1 = Math.min(frameWidth, Math.max(a.x, b.x));
  const y1 = Math.min(frameHeight, Math.max(a.y, b.y));
  const w = x1 - x0;
  const h = y1 - y0;
  if (w <= 0 || h <= 0) return null;
  return { x: x0, y: y0, w, h };
}

export interface DisplayBox {
  left: number;
  top: number;
  width: number;
  height: number;
}

/** Center-format detection box -> display-space rectangle. */
export function boxToDisplay(box: WireBox, scale: number): DisplayBox {
  return {
    left: (box.x - box.w / 2) * scale,
    top: (box.y - box.h / 2) * scale,
    width: box.w * scale,
    height: box.h * scale,
  };
}

export function rectToDisplay(rect: WireRect, scale: number): DisplayBox {
  return {
    left: rect.x * scale,
    top: rect.y * scale,
    width: rect.w * scale,
    height: rect.h * scale,
  };
}

/** True if the box center lies inside one of the rectangles (frame coords). */
export function boxCenterInRects(box: WireBox, rects: WireRect[]): boolean {
  return rects.some(
    (r) => box.x >= r.x && box.x < r.x + r.w && box.y >= r.y && box.y < r.y + r.h,
  );
}

/** Hit test for rect deletion: frame point inside rect. */
export function rectContains(rect: WireRect, p: DisplayPoint): boolean {
  return p.x >= rect.x && p.x < rect.x + rect.w && p.y >= rect.y && p.y < rect.y + rect.h;
}
