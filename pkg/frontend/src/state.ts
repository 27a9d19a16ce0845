/**
 * Client-side state: the latest snapshot, per-robot hue overlays from
 * light events, the scrolling sound/ack feed, and connection status.
 *
 * The state is the single source the render loop reads from; it is
 * mutated only by applying decoded server messages (thin-client rule:
 * nothing here ever changes performance state, only ClientMessages do).
 */

import type {
  CommandAck,
  RobotSnapshot,
  ServerMessage,
  SoundEventPayload,
} from "./protocol.js";

export type ConnectionStatus = "connecting" | "connected" | "reconnecting";

export interface FeedEntry {
  seq: number;
  t: number;
  kind: "sound" | "ack" | "error";
  text: string;
}

export const FEED_LIMIT = 60;

export class AppState {
  status: ConnectionStatus = "connecting";
  protocolVersion: number | null = null;
  /** Monotone message counter from the server; gaps mean dropped frames. */
  lastSeq = -1;
  t = 0;
  clockPhase = 0;
  robots: RobotSnapshot[] = [];
  feed: FeedEntry[] = [];
  acks: CommandAck[] = [];
  /** Sound events since the last render-loop drain (for sample playback). */
  pendingSounds: SoundEventPayload[] = [];

  apply(msg: ServerMessage): void {
    this.lastSeq = msg.seq;
    this.t = msg.t;
    switch (msg.kind) {
      case "snapshot":
        this.protocolVersion = msg.protocol_version;
        this.clockPhase = msg.clock_phase;
        this.robots = msg.robots;
        break;
      case "light": {
        // Hue changes arrive as light events between snapshots; fold them
        // into the robot view immediately so the next frame shows them.
        const robot = this.robots.find((r) => r.id === msg.event.robot);
        if (robot) {
          robot.hue = msg.event.hue;
        }
        break;
      }
      case "sound": {
        const e = msg.event;
        this.pendingSounds.push(e);
        this.pushFeed({
          seq: msg.seq,
          t: msg.t,
          kind: "sound",
          text: `robot ${e.robot} ${e.tone} (${e.instrument}) ` +
            `${e.purposeful ? "purposeful" : "accidental"} @ ${e.intensity.toFixed(2)}`,
        });
        break;
      }
      case "command_ack":
        this.acks.push(msg);
        this.pushFeed({
          seq: msg.seq,
          t: msg.t,
          kind: "ack",
          text: `command ${msg.command_id ?? "?"} ${msg.accepted ? "accepted" : "rejected"}` +
            (msg.detail ? `: ${msg.detail}` : ""),
        });
        break;
      case "error":
        this.pushFeed({
          seq: msg.seq,
          t: msg.t,
          kind: "error",
          text: `server error [${msg.code}] ${msg.detail}`,
        });
        break;
    }
  }

  /** Return and clear sounds queued since the last drain. */
  drainSounds(): SoundEventPayload[] {
    const out = this.pendingSounds;
    this.pendingSounds = [];
    return out;
  }

  private pushFeed(entry: FeedEntry): void {
    this.feed.push(entry);
    if (this.feed.length > FEED_LIMIT) {
      this.feed.splice(0, this.feed.length - FEED_LIMIT);
    }
  }
}
