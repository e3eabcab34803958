// Browser bootstrap: wires pointer events, controls and the socket client
// to the DOM. All attack numbers on screen come from server messages.

import { PanelClient } from "./client.js";
import { MaskEditor } from "./maskDraw.js";
import { boxCenterInRects } from "./geometry.js";
import { drawDetections, drawFrame, drawMaskRects } from "./render.js";
import type { ConfigUpdatePayload } from "./protocol.js";

const FRAME_SIDE_FALLBACK = 128;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function main(): void {
  const canvas = el<HTMLCanvasElement>("view");
  const ctx = canvas.getContext("2d");
  if (!ctx) throw new Error("no 2d context");

  const params = new URLSearchParams(window.location.search);
  const session = params.get("session") ?? "default";
  const host = params.get("server") ?? window.location.host;
  const url = `ws://${host}/attack?session=${encodeURIComponent(session)}&role=panel&adv=1`;

  const client = new PanelClient({ url, sessionId: session });
  const editor = new MaskEditor({
    frameWidth: FRAME_SIDE_FALLBACK,
    frameHeight: FRAME_SIDE_FALLBACK,
    displayScale: canvas.width / FRAME_SIDE_FALLBACK,
  });

  let frameBitmap: ImageBitmap | null = null;
  let frameSide = FRAME_SIDE_FALLBACK;
  let deleteMode = false;
  let showBoxes = true;

  const status = el<HTMLSpanElement>("status");
  const counts = el<HTMLSpanElement>("counts");
  const latency = el<HTMLSpanElement>("latency");
  const successLamp = el<HTMLSpanElement>("success");
  const lossCanvas = el<HTMLCanvasElement>("loss");
  const errorBox = el<HTMLDivElement>("error");

  function displayScale(): number {
    return canvas.width / frameSide;
  }

  function redraw(): void {
    const snap = client.state.snapshot();
    drawFrame(ctx!, frameBitmap, canvas.width, canvas.height);
    const dets = client.state.pairedDetections();
    if (dets) {
      drawDetections(ctx!, dets, { scale: displayScale(), showBoxes });
      const inMask = dets.boxes.filter((b) =>
        boxCenterInRects(b, snap.ackedRects),
      ).length;
      counts.textContent =
        `benign ${dets.benign_count} / adversarial ${dets.boxes.length} ` +
        `(${inMask} in mask)`;
      latency.textContent = `${dets.attack_ms.toFixed(1)} ms`;
    }
    drawMaskRects(ctx!, snap.ackedRects, editor.pendingRect(), displayScale());
    successLamp.classList.toggle("lit", snap.success);
    status.textContent = snap.status + (client.queuedCount ? " (edits queued)" : "");
    errorBox.textContent = snap.lastError
      ? `${snap.lastError.code}: ${snap.lastError.message}`
      : "";
    drawLoss(snap.lossHistory);
  }

  function drawLoss(history: number[]): void {
    const g = lossCanvas.getContext("2d");
    if (!g) return;
    g.clearRect(0, 0, lossCanvas.width, lossCanvas.height);
    if (history.length < 2) return;
    const recent = history.slice(-120);
    const lo = Math.min(...recent);
    const hi = Math.max(...recent);
    const span = hi - lo || 1;
    g.strokeStyle = "#80cbc4";
    g.beginPath();
    recent.forEach((v, i) => {
      const x = (i / (recent.length - 1)) * lossCanvas.width;
      const y = lossCanvas.height - ((v - lo) / span) * (lossCanvas.height - 4) - 2;
      if (i === 0) g.moveTo(x, y);
      else g.lineTo(x, y);
    });
    g.stroke();
  }

  client.state.onChange(() => {
    const snap = client.state.snapshot();
    if (snap.advFrame) {
      frameSide = snap.advFrame.width;
      editor.options.frameWidth = snap.advFrame.width;
      editor.options.frameHeight = snap.advFrame.height;
      editor.setDisplayScale(displayScale());
      const bytes = Uint8Array.from(atob(snap.advFrame.data), (c) => c.charCodeAt(0));
      createImageBitmap(new Blob([bytes], { type: "image/png" })).then((bmp) => {
        frameBitmap = bmp;
        redraw();
      });
    }
    if (snap.ackedRects) editor.applyAck(snap.ackedRects);
    redraw();
  });

  function canvasPoint(ev: PointerEvent): { x: number; y: number } {
    const rect = canvas.getBoundingClientRect();
    // CSS size may differ from the canvas bitmap size; normalize first.
    const sx = canvas.width / rect.width;
    const sy = canvas.height / rect.height;
    return { x: (ev.clientX - rect.left) * sx, y: (ev.clientY - rect.top) * sy };
  }

  canvas.addEventListener("pointerdown", (ev) => {
    const p = canvasPoint(ev);
    if (deleteMode || ev.altKey) {
      const payload = editor.deleteAt(p);
      if (payload) client.sendMaskUpdate(payload);
      return;
    }
    editor.pointerDown(p);
  });
  canvas.addEventListener("pointermove", (ev) => {
    editor.pointerMove(canvasPoint(ev));
    redraw();
  });
  canvas.addEventListener("pointerup", (ev) => {
    const payload = editor.pointerUp(canvasPoint(ev));
    if (payload) client.sendMaskUpdate(payload);
    redraw();
  });

  el<HTMLButtonElement>("clear").addEventListener("click", () => {
    client.sendMaskUpdate(editor.clearAll());
    redraw();
  });
  el<HTMLInputElement>("deleteMode").addEventListener("change", (ev) => {
    deleteMode = (ev.target as HTMLInputElement).checked;
  });
  el<HTMLInputElement>("showBoxes").addEventListener("change", (ev) => {
    showBoxes = (ev.target as HTMLInputElement).checked;
    redraw();
  });

  el<HTMLButtonElement>("applyConfig").addEventListener("click", () => {
    const mode = el<HTMLSelectElement>("mode").value;
    const payload: ConfigUpdatePayload = {
      mode,
      xi: Number(el<HTMLInputElement>("xi").value),
      alpha: Number(el<HTMLInputElement>("alpha").value),
      monochrome: el<HTMLInputElement>("monochrome").checked,
      channel_source: el<HTMLSelectElement>("channel").value,
      iters_per_frame: Number(el<HTMLInputElement>("itersPerFrame").value),
    };
    if (mode !== "multi-untargeted") {
      payload.target_class = Number(el<HTMLInputElement>("target").value);
    }
    client.sendConfigUpdate(payload);
  });

  client.connect();
  redraw();
}

main();
