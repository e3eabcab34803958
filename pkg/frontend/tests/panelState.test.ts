import { describe, expect, it } from "vitest";

import { PanelState } from "../src/panelState.js";
import { makeMessage } from "../src/protocol.js";

const detectionsPayload = (frameSeq: number, benign = 1, boxes = 2) => ({
  benign_count: benign,
  boxes: Array.from({ length: boxes }, (_, i) => ({
    class_id: 1 + (i % 3),
    score: 0.9,
    x: 120 + i,
    y: 120,
    w: 20,
    h: 20,
  })),
  attack_ms: 4.2,
  frame_seq: frameSeq,
});

describe("panel state", () => {
  it("applies in-order messages and drops out-of-order ones", () => {
    const s = new PanelState();
    expect(s.apply(makeMessage("stats", "s", 2, {
      loss: 1.0, iterations_total: 4, success: false, frame_seq: 1,
    }))).toBe(true);
    expect(s.apply(makeMessage("stats", "s", 1, {
      loss: 9.0, iterations_total: 2, success: true, frame_seq: 1,
    }))).toBe(false);
    expect(s.snapshot().stats!.loss).toBe(1.0);
  });

  it("loss history strictly appends", () => {
    const s = new PanelState();
    for (let i = 1; i <= 5; i++) {
      s.apply(makeMessage("stats", "s", i, {
        loss: i * 1.5, iterations_total: i, success: false, frame_seq: i,
      }));
    }
    expect(s.snapshot().lossHistory).toEqual([1.5, 3.0, 4.5, 6.0, 7.5]);
  });

  it("acked rects come only from mask_update acknowledgments", () => {
    const s = new PanelState();
    expect(s.snapshot().ackedRects).toEqual([]);
    s.apply(makeMessage("mask_update", "s", 1, {
      rects: [{ x: 1, y: 2, w: 3, h: 4 }],
    }));
    expect(s.snapshot().ackedRects).toEqual([{ x: 1, y: 2, w: 3, h: 4 }]);
  });

  it("success indicator follows the latest stats", () => {
    const s = new PanelState();
    s.apply(makeMessage("stats", "s", 1, {
      loss: 1, iterations_total: 1, success: true, frame_seq: 1,
    }));
    expect(s.snapshot().success).toBe(true);
    s.apply(makeMessage("stats", "s", 2, {
      loss: 1, iterations_total: 2, success: false, frame_seq: 2,
    }));
    expect(s.snapshot().success).toBe(false);
  });

  it("pairs detections with the displayed frame by frame_seq", () => {
    const s = new PanelState();
    s.apply(makeMessage("detections", "s", 1, detectionsPayload(7)));
    s.apply(makeMessage("adv_frame", "s", 2, {
      width: 128, height: 128, encoding: "png-base64", data: "eA==", frame_seq: 7,
    }));
    expect(s.pairedDetections()).not.toBeNull();
    s.apply(makeMessage("adv_frame", "s", 3, {
      width: 128, height: 128, encoding: "png-base64", data: "eA==", frame_seq: 8,
    }));
    expect(s.pairedDetections()).toBeNull(); // stale detections for frame 7
  });

  it("records errors", () => {
    const s = new PanelState();
    s.apply(makeMessage("error", "s", 1, { code: "bad_frame", message: "nope" }));
    expect(s.snapshot().lastError!.code).toBe("bad_frame");
  });
});
