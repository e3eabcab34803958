// Socket client with write-queueing: mask/config edits made while
// disconnected are queued, flagged, and flushed on reconnect with fresh
// sequence numbers.

import {
  canonicalJson,
  makeMessage,
  parseServerMessage,
  type ConfigUpdatePayload,
  type MaskUpdatePayload,
  type MessageType,
} from "./protocol.js";
import { PanelState } from "./panelState.js";

export interface SocketLike {
  send(text: string): void;
  close(): void;
  onmessage: ((ev: { data: string }) => void) | null;
  onopen: (() => void) | null;
  onclose: (() => void) | null;
}

export type SocketFactory = (url: string) => SocketLike;

export interface PanelClientOptions {
  url: string;
  sessionId: string;
  socketFactory?: SocketFactory;
}

export class PanelClient {
  readonly state = new PanelState();
  private socket: SocketLike | null = null;
  private outSeq = 0;
  private queued: Array<{ type: MessageType; payload: Record<string, unknown> }> = [];
  private readonly options: PanelClientOptions;

  constructor(options: PanelClientOptions) {
    this.options = options;
  }

  get queuedCount(): number {
    return this.queued.length;
  }

  connect(): void {
    const factory =
      this.options.socketFactory ??
      ((url: string) => new WebSocket(url) as unknown as SocketLike);
    this.state.setStatus("connecting");
    const socket = factory(this.options.url);
    this.socket = socket;
    socket.onopen = () => {
      this.state.setStatus("connected");
      const pending = this.queued;
      this.queued = [];
      for (const m of pending) this.sendNow(m.type, m.payload);
    };
    socket.onclose = () => {
      this.socket = null;
      this.state.setStatus("disconnected");
    };
    socket.onmessage = (ev) => {
      const message = parseServerMessage(ev.data);
      if (message) this.state.apply(message);
    };
  }

  disconnect(): void {
    this.socket?.close();
    this.socket = null;
    this.state.setStatus("disconnected");
  }

  sendMaskUpdate(payload: MaskUpdatePayload): void {
    this.sendOrQueue("mask_update", payload as unknown as Record<string, unknown>);
  }

  sendConfigUpdate(payload: ConfigUpdatePayload): void {
    this.sendOrQueue("config_update", payload as unknown as Record<string, unknown>);
  }

  private sendOrQueue(type: MessageType, payload: Record<string, unknown>): void {
    if (this.state.status === "connected" && this.socket) {
      this.sendNow(type, payload);
    } else {
      this.queued.push({ type, payload });
    }
  }

  private sendNow(type: MessageType, payload: Record<string, unknown>): void {
    this.outSeq += 1;
    const message = makeMessage(type, this.options.sessionId, this.outSeq, payload);
    this.socket!.send(canonicalJson(message));
  }
}
