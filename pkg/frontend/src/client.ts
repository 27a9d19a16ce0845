/**
 * Bridge client: one websocket to the engine with automatic reconnect.
 *
 * Commands submitted while disconnected are queued locally for up to
 * one second; older ones are dropped and reported so the UI can toast.
 * The socket constructor and clock are injectable so the same class
 * runs in the browser and under Node in tests.
 */

import {
  decodeServerMessage,
  encodeCommandMessage,
  ProtocolError,
  type ControlCommand,
  type ServerMessage,
} from "./protocol.js";

/** The subset of the WebSocket API the client needs. */
export interface SocketLike {
  // Handler parameter types are loose so both the browser WebSocket and
  // Node implementations are assignable without adapters.
  onopen: ((ev: never) => void) | null;
  onmessage: ((ev: never) => void) | null;
  onclose: ((ev: never) => void) | null;
  onerror: ((ev: never) => void) | null;
  send(data: string): void;
  close(): void;
}

export type SocketFactory = (url: string) => SocketLike;

export interface BridgeClientOptions {
  url: string;
  socketFactory: SocketFactory;
  /** Monotonic clock in milliseconds; defaults to performance/Date now. */
  now?: () => number;
  /** Delay between reconnect attempts, ms. */
  reconnectDelayMs?: number;
  /** How long a command may wait for a connection before being dropped, ms. */
  queueTtlMs?: number;
  onMessage?: (msg: ServerMessage) => void;
  onStatus?: (status: "connecting" | "connected" | "reconnecting") => void;
  /** Called when a queued command expires unsent. */
  onDropped?: (command: ControlCommand) => void;
  onProtocolError?: (err: ProtocolError) => void;
}

interface QueuedCommand {
  frame: string;
  queuedAt: number;
}

const DEFAULT_RECONNECT_DELAY_MS = 250;
const DEFAULT_QUEUE_TTL_MS = 1000;

export class BridgeClient {
  private readonly opts: BridgeClientOptions;
  private readonly now: () => number;
  private socket: SocketLike | null = null;
  private open = false;
  private closed = false;
  private everConnected = false;
  private nextCommandId = 0;
  private queue: QueuedCommand[] = [];
  private reconnectTimer: ReturnType<typeof setTimeout> | null = null;

  constructor(opts: BridgeClientOptions) {
    this.opts = opts;
    this.now = opts.now ?? (() => Date.now());
  }

  connect(): void {
    if (this.closed) return;
    this.emitStatus(this.everConnected ? "reconnecting" : "connecting");
    const socket = this.opts.socketFactory(this.opts.url);
    this.socket = socket;
    socket.onopen = () => {
      if (socket !== this.socket) return;
      this.open = true;
      this.everConnected = true;
      this.emitStatus("connected");
      this.flushQueue();
    };
    socket.onmessage = (ev: { data: unknown }) => {
      if (socket !== this.socket) return;
      try {
        this.opts.onMessage?.(decodeServerMessage(String(ev.data)));
      } catch (err) {
        if (err instanceof ProtocolError) {
          this.opts.onProtocolError?.(err);
        } else {
          throw err;
        }
      }
    };
    socket.onerror = () => {
      // The close handler does the actual retry; some socket
      // implementations fire error without close on refused connects.
    };
    socket.onclose = () => {
      if (socket !== this.socket) return;
      this.open = false;
      this.socket = null;
      if (!this.closed) {
        this.emitStatus("reconnecting");
        this.scheduleReconnect();
      }
    };
  }

  get isConnected(): boolean {
    return this.open;
  }

  /** Send a command now, or queue it briefly while disconnected. */
  send(command: ControlCommand): number {
    const id = this.nextCommandId++;
    const frame = encodeCommandMessage({
      command,
      client_time: this.now() / 1000,
      command_id: id,
    });
    if (this.open && this.socket) {
      this.socket.send(frame);
    } else {
      this.pruneQueue();
      this.queue.push({ frame, queuedAt: this.now() });
    }
    return id;
  }

  close(): void {
    this.closed = true;
    if (this.reconnectTimer !== null) {
      clearTimeout(this.reconnectTimer);
      this.reconnectTimer = null;
    }
    this.socket?.close();
    this.socket = null;
    this.open = false;
  }

  private flushQueue(): void {
    this.pruneQueue();
    for (const item of this.queue) {
      this.socket?.send(item.frame);
    }
    this.queue = [];
  }

  private pruneQueue(): void {
    const ttl = this.opts.queueTtlMs ?? DEFAULT_QUEUE_TTL_MS;
    const cutoff = this.now() - ttl;
    const keep: QueuedCommand[] = [];
    for (const item of this.queue) {
      if (item.queuedAt >= cutoff) {
        keep.push(item);
      } else {
        const parsed = JSON.parse(item.frame) as { command: ControlCommand };
        this.opts.onDropped?.(parsed.command);
      }
    }
    this.queue = keep;
  }

  private scheduleReconnect(): void {
    if (this.reconnectTimer !== null) return;
    const delay = this.opts.reconnectDelayMs ?? DEFAULT_RECONNECT_DELAY_MS;
    this.reconnectTimer = setTimeout(() => {
      this.reconnectTimer = null;
      this.connect();
    }, delay);
  }

  private emitStatus(status: "connecting" | "connected" | "reconnecting"): void {
    this.opts.onStatus?.(status);
  }
}
