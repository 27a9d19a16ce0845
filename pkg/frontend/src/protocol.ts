/**
 * Wire protocol (version 1) between this client and the engine's live
 * bridge. One JSON object per text frame. Decoding tolerates unknown
 * extra fields; a frame that cannot be decoded raises ProtocolError.
 */

export const PROTOCOL_VERSION = 1;

export type CommandKind =
  | "set_color"
  | "spin"
  | "circle"
  | "switch_instrument"
  | "recenter"
  | "stop"
  | "restart";

export const COMMAND_KINDS: readonly CommandKind[] = [
  "set_color",
  "spin",
  "circle",
  "switch_instrument",
  "recenter",
  "stop",
  "restart",
];

export interface RobotSnapshot {
  id: number;
  x: number;
  y: number;
  heading: number;
  mode: string;
  hue: number;
  primary_wall: number;
  arena_position: [number, number];
}

export interface Snapshot {
  kind: "snapshot";
  seq: number;
  t: number;
  clock_phase: number;
  protocol_version: number;
  robots: RobotSnapshot[];
}

export interface SoundEventPayload {
  robot: number;
  wall: number;
  instrument: string;
  tone: string;
  intensity: number;
  purposeful: boolean;
  stroke_index: number;
  [extra: string]: unknown;
}

export interface SoundMessage {
  kind: "sound";
  seq: number;
  t: number;
  event: SoundEventPayload;
}

export interface LightEventPayload {
  robot: number;
  hue: number;
  cause: string;
}

export interface LightMessage {
  kind: "light";
  seq: number;
  t: number;
  event: LightEventPayload;
}

export interface CommandAck {
  kind: "command_ack";
  seq: number;
  t: number;
  command_id: number | string | null;
  accepted: boolean;
  detail: string;
}

export interface ErrorMessage {
  kind: "error";
  seq: number;
  t: number;
  code: string;
  detail: string;
}

export type ServerMessage =
  | Snapshot
  | SoundMessage
  | LightMessage
  | CommandAck
  | ErrorMessage;

export interface ControlCommand {
  kind: CommandKind;
  palette_index?: number;
}

export interface CommandMessage {
  command: ControlCommand;
  client_time: number;
  command_id?: number | string;
}

export class ProtocolError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "ProtocolError";
  }
}

function asObject(value: unknown, what: string): Record<string, unknown> {
  if (typeof value !== "object" || value === null || Array.isArray(value)) {
    throw new ProtocolError(`${what} must be a JSON object`);
  }
  return value as Record<string, unknown>;
}

function asNumber(value: unknown, what: string): number {
  if (typeof value !== "number" || !Number.isFinite(value)) {
    throw new ProtocolError(`${what} must be a finite number`);
  }
  return value;
}

function decodeRobot(value: unknown): RobotSnapshot {
  const doc = asObject(value, "robot");
  const pos = doc.arena_position;
  if (!Array.isArray(pos) || pos.length !== 2) {
    throw new ProtocolError("robot.arena_position must be a 2-element array");
  }
  return {
    id: asNumber(doc.id, "robot.id"),
    x: asNumber(doc.x, "robot.x"),
    y: asNumber(doc.y, "robot.y"),
    heading: asNumber(doc.heading, "robot.heading"),
    mode: String(doc.mode),
    hue: asNumber(doc.hue, "robot.hue"),
    primary_wall: asNumber(doc.primary_wall, "robot.primary_wall"),
    arena_position: [asNumber(pos[0], "x"), asNumber(pos[1], "y")],
  };
}

/** Parse one server frame; throws ProtocolError on anything undecodable. */
export function decodeServerMessage(frame: string): ServerMessage {
  let doc: Record<string, unknown>;
  try {
    doc = asObject(JSON.parse(frame), "frame");
  } catch (err) {
    if (err instanceof ProtocolError) throw err;
    throw new ProtocolError(`frame is not valid JSON: ${err}`);
  }
  const seq = asNumber(doc.seq, "seq");
  const t = asNumber(doc.t, "t");
  switch (doc.kind) {
    case "snapshot": {
      if (!Array.isArray(doc.robots)) {
        throw new ProtocolError("snapshot.robots must be an array");
      }
      return {
        kind: "snapshot",
        seq,
        t,
        clock_phase: asNumber(doc.clock_phase, "clock_phase"),
        protocol_version: asNumber(doc.protocol_version, "protocol_version"),
        robots: doc.robots.map(decodeRobot),
      };
    }
    case "sound":
      return {
        kind: "sound",
        seq,
        t,
        event: asObject(doc.event, "sound.event") as unknown as SoundEventPayload,
      };
    case "light": {
      const event = asObject(doc.event, "light.event");
      return {
        kind: "light",
        seq,
        t,
        event: {
          robot: asNumber(event.robot, "light.robot"),
          hue: asNumber(event.hue, "light.hue"),
          cause: String(event.cause),
        },
      };
    }
    case "command_ack":
      return {
        kind: "command_ack",
        seq,
        t,
        command_id:
          doc.command_id === undefined ? null : (doc.command_id as number | string | null),
        accepted: Boolean(doc.accepted),
        detail: String(doc.detail ?? ""),
      };
    case "error":
      return {
        kind: "error",
        seq,
        t,
        code: String(doc.code),
        detail: String(doc.detail ?? ""),
      };
    default:
      throw new ProtocolError(`unknown server message kind ${JSON.stringify(doc.kind)}`);
  }
}

/** Serialize a command for the wire. */
export function encodeCommandMessage(msg: CommandMessage): string {
  const doc: Record<string, unknown> = {
    kind: "command",
    command: msg.command,
    client_time: msg.client_time,
  };
  if (msg.command_id !== undefined) {
    doc.command_id = msg.command_id;
  }
  return JSON.stringify(doc);
}
