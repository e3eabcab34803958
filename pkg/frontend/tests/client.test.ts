import { describe, expect, it } from "vitest";

import { PanelClient, type SocketLike } from "../src/client.js";
import { canonicalJson, makeMessage } from "../src/protocol.js";

class FakeSocket implements SocketLike {
  sent: string[] = [];
  onmessage: ((ev: { data: string }) => void) | null = null;
  onopen: (() => void) | null = null;
  onclose: (() => void) | null = null;

  send(text: string): void {
    this.sent.push(text);
  }

  close(): void {
    this.onclose?.();
  }

  open(): void {
    this.onopen?.();
  }

  receive(message: unknown): void {
    this.onmessage?.({ data: JSON.stringify(message) });
  }
}

function connected() {
  const socket = new FakeSocket();
  const client = new PanelClient({
    url: "ws://test/attack",
    sessionId: "s",
    socketFactory: () => socket,
  });
  client.connect();
  socket.open();
  return { socket, client };
}

describe("panel client", () => {
  it("sends mask updates with strictly increasing sequences", () => {
    const { socket, client } = connected();
    client.sendMaskUpdate({ rects: [{ x: 1, y: 2, w: 3, h: 4 }] });
    client.sendMaskUpdate({ rects: [] });
    const msgs = socket.sent.map((t) => JSON.parse(t));
    expect(msgs.map((m) => m.sequence)).toEqual([1, 2]);
    expect(msgs[0].type).toBe("mask_update");
    expect(msgs[0].session_id).toBe("s");
  });

  it("queues edits while disconnected and flushes on reconnect", () => {
    const socket = new FakeSocket();
    const client = new PanelClient({
      url: "ws://test/attack",
      sessionId: "s",
      socketFactory: () => socket,
    });
    client.sendMaskUpdate({ rects: [{ x: 0, y: 0, w: 5, h: 5 }] });
    expect(client.queuedCount).toBe(1);
    expect(socket.sent).toHaveLength(0);

    client.connect();
    socket.open();
    expect(client.queuedCount).toBe(0);
    expect(socket.sent).toHaveLength(1);
    expect(JSON.parse(socket.sent[0]).payload.rects).toEqual([
      { x: 0, y: 0, w: 5, h: 5 },
    ]);
  });

  it("routes inbound messages into panel state", () => {
    const { socket, client } = connected();
    socket.receive(makeMessage("stats", "s", 1, {
      loss: 2.5, iterations_total: 4, success: true, frame_seq: 1,
    }));
    expect(client.state.snapshot().stats!.loss).toBe(2.5);
    expect(client.state.status).toBe("connected");
  });

  it("ignores garbage from the socket", () => {
    const { socket, client } = connected();
    socket.onmessage?.({ data: "not json" });
    expect(client.state.snapshot().stats).toBeNull();
  });

  it("canonical json sorts keys like the server", () => {
    const text = canonicalJson({ b: 1, a: { d: 2, c: [3, 4] } });
    expect(text).toBe('{"a":{"c":[3,4],"d":2},"b":1}');
  });
});
