// Thin websocket wrapper around the live-service wire protocol with
// status reporting and capped-backoff reconnection. The socket
// constructor is injectable so tests can drive the client with a fake.

import { parseFrame, ServerFrame } from "./wire.js";
import { ConnectionStatus } from "./state.js";

export interface SocketLike {
  onopen: (() => void) | null;
  onmessage: ((ev: { data: string }) => void) | null;
  onclose: (() => void) | null;
  onerror: (() => void) | null;
  send(data: string): void;
  close(): void;
}

export type SocketFactory = (url: string) => SocketLike;

export interface LiveClientOptions {
  socketFactory?: SocketFactory;
  /** set false for tests; default true */
  reconnect?: boolean;
  initialBackoffMs?: number;
  maxBackoffMs?: number;
}

export class LiveClient {
  onFrame: ((frame: ServerFrame) => void) | null = null;
  onStatus: ((status: ConnectionStatus) => void) | null = null;

  private socket: SocketLike | null = null;
  private closed = false;
  private backoffMs: number;
  private readonly factory: SocketFactory;
  private readonly reconnect: boolean;
  private readonly initialBackoffMs: number;
  private readonly maxBackoffMs: number;

  constructor(
    private readonly url: string,
    options: LiveClientOptions = {},
  ) {
    this.factory =
      options.socketFactory ??
      ((u: string) => new WebSocket(u) as unknown as SocketLike);
    this.reconnect = options.reconnect ?? true;
    this.initialBackoffMs = options.initialBackoffMs ?? 1000;
    this.maxBackoffMs = options.maxBackoffMs ?? 8000;
    this.backoffMs = this.initialBackoffMs;
  }

  connect(): void {
    this.closed = false;
    this.open();
  }

  send(command: string): void {
    this.socket?.send(command);
  }

  close(): void {
    this.closed = true;
    this.socket?.close();
    this.socket = null;
  }

  private open(): void {
    this.setStatus("connecting");
    const socket = this.factory(this.url);
    this.socket = socket;

    socket.onopen = () => {
      this.backoffMs = this.initialBackoffMs;
      this.setStatus("live");
    };
    socket.onmessage = (ev) => {
      let frame: ServerFrame | null;
      try {
        frame = parseFrame(ev.data);
      } catch {
        return; // ignore malformed frames
      }
      if (frame !== null) this.onFrame?.(frame);
    };
    socket.onclose = () => {
      this.setStatus("closed");
      if (!this.closed && this.reconnect) {
        setTimeout(() => this.open(), this.backoffMs);
        this.backoffMs = Math.min(this.backoffMs * 2, this.maxBackoffMs);
      }
    };
    socket.onerror = () => {
      // onclose follows and handles the retry
    };
  }

  private setStatus(status: ConnectionStatus): void {
    this.onStatus?.(status);
  }
}

/** ws:// URL from the page's query parameters (host, port). */
export function wireUrl(params: URLSearchParams, defaultPort = 8000): string {
  const host = params.get("host") ?? "127.0.0.1";
  const port = params.get("port") ?? String(defaultPort);
  return `ws://${host}:${port}/ws`;
}
