// Websocket client with a latest-value mailbox: the socket handler stores
// the newest state/event/end messages, the render loop reads them whenever
// it likes. No queuing, no backpressure concerns for a 30 Hz HUD.

import { parseServerMessage, type EndMsg, type EventMsg, type StateMsg } from "./protocol";

export interface Mailbox {
  state: StateMsg | null;
  receivedAtMs: number;
  lastEvent: EventMsg | null;
  end: EndMsg | null;
  error: string | null;
}

export function emptyMailbox(): Mailbox {
  return { state: null, receivedAtMs: 0, lastEvent: null, end: null, error: null };
}

/** Fold one raw frame into the mailbox (pure; clock injected for tests). */
export function deliver(box: Mailbox, raw: string, nowMs: number): Mailbox {
  const msg = parseServerMessage(raw);
  if (msg === null) return box;
  switch (msg.type) {
    case "state":
      return { ...box, state: msg, receivedAtMs: nowMs };
    case "event":
      return { ...box, lastEvent: msg };
    case "end":
      return { ...box, end: msg };
    case "error":
      return { ...box, error: msg.reason };
  }
}

export class Client {
  private socket: WebSocket;
  box: Mailbox = emptyMailbox();
  onerror: ((reason: string) => void) | null = null;

  constructor(url: string) {
    this.socket = new WebSocket(url);
    this.socket.onmessage = (ev) => {
      this.box = deliver(this.box, String(ev.data), performance.now());
      if (this.box.error && this.onerror) {
        this.onerror(this.box.error);
        this.box = { ...this.box, error: null };
      }
    };
  }

  get ready(): boolean {
    return this.socket.readyState === WebSocket.OPEN;
  }

  whenOpen(fn: () => void): void {
    if (this.ready) fn();
    else this.socket.addEventListener("open", fn, { once: true });
  }

  send(frame: string): void {
    if (this.ready) this.socket.send(frame);
  }

  close(): void {
    this.socket.close();
  }
}
