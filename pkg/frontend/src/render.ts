// Canvas rendering: adversarial frame, detection boxes with class/score
// labels, drawn mask rectangles and the live drag preview.

import { boxToDisplay, rectToDisplay } from "./geometry.js";
import type { DetectionsPayload, WireRect } from "./protocol.js";

const CLASS_COLORS = ["#ff5252", "#4caf50", "#42a5f5", "#ffb300", "#ab47bc", "#26c6da"];

export interface RenderOptions {
  scale: number;
  showBoxes: boolean;
  classNames?: string[];
}

export function classColor(classId: number): string {
  return CLASS_COLORS[(classId - 1) % CLASS_COLORS.length];
}

export function classLabel(classId: number, score: number, names?: string[]): string {
  const name = names && names[classId - 1] ? names[classId - 1] : `class ${classId}`;
  return `${name} ${score.toFixed(2)}`;
}

export function drawFrame(
  ctx: CanvasRenderingContext2D,
  frame: CanvasImageSource | null,
  width: number,
  height: number,
): void {
  ctx.fillStyle = "#111";
  ctx.fillRect(0, 0, width, height);
  if (frame) ctx.drawImage(frame, 0, 0, width, height);
}

export function drawDetections(
  ctx: CanvasRenderingContext2D,
  detections: DetectionsPayload,
  options: RenderOptions,
): void {
  if (!options.showBoxes) return;
  ctx.lineWidth = 2;
  ctx.font = "12px monospace";
  for (const box of detections.boxes) {
    const d = boxToDisplay(box, options.scale);
    const color = classColor(box.class_id);
    ctx.strokeStyle = color;
    ctx.strokeRect(d.left, d.top, d.width, d.height);
    const label = classLabel(box.class_id, box.score, options.classNames);
    const tw = ctx.measureText(label).width + 6;
    ctx.fillStyle = color;
    ctx.fillRect(d.left, d.top - 14, tw, 14);
    ctx.fillStyle = "#000";
    ctx.fillText(label, d.left + 3, d.top - 3);
  }
}

export function drawMaskRects(
  ctx: CanvasRenderingContext2D,
  rects: WireRect[],
  pending: WireRect | null,
  scale: number,
): void {
  ctx.save();
  ctx.setLineDash([6, 4]);
  ctx.lineWidth = 1.5;
  ctx.strokeStyle = "#ffee58";
  ctx.fillStyle = "rgba(255, 238, 88, 0.12)";
  for (const r of rects) {
    const d = rectToDisplay(r, scale);
    ctx.fillRect(d.left, d.top, d.width, d.height);
    ctx.strokeRect(d.left, d.top, d.width, d.height);
  }
  if (pending) {
    ctx.strokeStyle = "#ffffff";
    const d = rectToDisplay(pending, scale);
    ctx.strokeRect(d.left, d.top, d.width, d.height);
  }
  ctx.restore();
}
