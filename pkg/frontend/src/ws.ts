// WebSocket client: upgrades against the debug server's protocol port and
// turns text frames into typed messages.

import { parseMessage, type Message, type Request } from "./protocol.js";

export interface ClientCallbacks {
  onOpen: () => void;
  onMessage: (message: Message) => void;
  onClose: () => void;
}

export class DebugClient {
  private ws: WebSocket;
  private nextId = 1;

  constructor(url: string, callbacks: ClientCallbacks) {
    this.ws = new WebSocket(url);
    this.ws.onopen = () => callbacks.onOpen();
    this.ws.onclose = () => callbacks.onClose();
    this.ws.onerror = () => callbacks.onClose();
    this.ws.onmessage = (event) => {
      const message = parseMessage(String(event.data));
      if (message !== null) {
        callbacks.onMessage(message);
      }
    };
  }

  freshId(): number {
    return this.nextId++;
  }

  send(request: Request): void {
    this.ws.send(JSON.stringify(request));
  }

  close(): void {
    this.ws.close();
  }
}

export function defaultUrl(): string {
  const host = window.location.hostname || "127.0.0.1";
  const port = window.location.port || "4711";
  return `ws://${host}:${port}/`;
}
