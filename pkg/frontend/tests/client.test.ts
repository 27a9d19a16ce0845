import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { BridgeClient, type SocketLike } from "../src/client.js";
import type { ControlCommand, ServerMessage } from "../src/protocol.js";

class FakeSocket implements SocketLike {
  onopen: ((ev: never) => void) | null = null;
  onmessage: ((ev: never) => void) | null = null;
  onclose: ((ev: never) => void) | null = null;
  onerror: ((ev: never) => void) | null = null;
  sent: string[] = [];
  closed = false;

  send(data: string): void {
    this.sent.push(data);
  }
  close(): void {
    this.closed = true;
    this.onclose?.(undefined as never);
  }
  serverOpen(): void {
    this.onopen?.(undefined as never);
  }
  serverSend(frame: string): void {
    this.onmessage?.({ data: frame } as never);
  }
  serverDrop(): void {
    this.onclose?.(undefined as never);
  }
}

function makeClient(overrides: {
  onMessage?: (msg: ServerMessage) => void;
  onStatus?: (s: string) => void;
  onDropped?: (c: ControlCommand) => void;
  now?: () => number;
} = {}) {
  const sockets: FakeSocket[] = [];
  const statuses: string[] = [];
  const client = new BridgeClient({
    url: "ws://test/ws",
    socketFactory: () => {
      const socket = new FakeSocket();
      sockets.push(socket);
      return socket;
    },
    now: overrides.now,
    reconnectDelayMs: 100,
    queueTtlMs: 1000,
    onMessage: overrides.onMessage,
    onStatus: (s) => {
      statuses.push(s);
      overrides.onStatus?.(s);
    },
    onDropped: overrides.onDropped,
  });
  return { client, sockets, statuses };
}

beforeEach(() => vi.useFakeTimers());
afterEach(() => vi.useRealTimers());

describe("BridgeClient", () => {
  it("sends immediately when connected, with increasing command ids", () => {
    const { client, sockets } = makeClient();
    client.connect();
    sockets[0].serverOpen();
    client.send({ kind: "spin" });
    client.send({ kind: "stop" });
    const frames = sockets[0].sent.map((f) => JSON.parse(f));
    expect(frames.map((f) => f.command.kind)).toEqual(["spin", "stop"]);
    expect(frames.map((f) => f.command_id)).toEqual([0, 1]);
  });

  it("decodes incoming frames and surfaces them via onMessage", () => {
    const got: ServerMessage[] = [];
    const { client, sockets } = makeClient({ onMessage: (m) => got.push(m) });
    client.connect();
    sockets[0].serverOpen();
    sockets[0].serverSend(
      JSON.stringify({ kind: "command_ack", seq: 1, t: 0.5, command_id: 0, accepted: true, detail: "" }),
    );
    expect(got).toHaveLength(1);
    expect(got[0].kind).toBe("command_ack");
  });

  it("queues commands while disconnected and flushes on connect", () => {
    let clock = 0;
    const { client, sockets } = makeClient({ now: () => clock });
    client.connect();
    client.send({ kind: "recenter" }); // socket not open yet
    clock += 400;
    sockets[0].serverOpen();
    expect(sockets[0].sent).toHaveLength(1);
    expect(JSON.parse(sockets[0].sent[0]).command.kind).toBe("recenter");
  });

  it("drops commands queued for more than one second, reporting each", () => {
    let clock = 0;
    const dropped: ControlCommand[] = [];
    const { client, sockets } = makeClient({ now: () => clock, onDropped: (c) => dropped.push(c) });
    client.connect();
    client.send({ kind: "spin" });
    clock += 1500;
    client.send({ kind: "stop" }); // pruning happens here and on flush
    sockets[0].serverOpen();
    expect(dropped.map((c) => c.kind)).toEqual(["spin"]);
    expect(sockets[0].sent.map((f) => JSON.parse(f).command.kind)).toEqual(["stop"]);
  });

  it("reconnects after a drop and reports status transitions", () => {
    const { client, sockets, statuses } = makeClient();
    client.connect();
    sockets[0].serverOpen();
    sockets[0].serverDrop();
    expect(statuses).toEqual(["connecting", "connected", "reconnecting"]);
    vi.advanceTimersByTime(150);
    expect(sockets).toHaveLength(2);
    sockets[1].serverOpen();
    expect(statuses[statuses.length - 1]).toBe("connected");
    expect(client.isConnected).toBe(true);
  });

  it("stops reconnecting once closed", () => {
    const { client, sockets } = makeClient();
    client.connect();
    sockets[0].serverOpen();
    client.close();
    vi.advanceTimersByTime(1000);
    expect(sockets).toHaveLength(1);
    expect(client.isConnected).toBe(false);
  });
});
