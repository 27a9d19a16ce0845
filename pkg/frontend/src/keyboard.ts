/**
 * Key controller: maps physical key codes (and on-screen key clicks) to
 * control commands. The map ships as a JSON asset (keymap.json) so it
 * can be rebound without code changes; unmapped keys produce nothing.
 */

import { COMMAND_KINDS, type CommandKind, type ControlCommand } from "./protocol.js";

export interface KeyBinding {
  /** KeyboardEvent.code value, e.g. "KeyA". */
  code: string;
  command: CommandKind;
  label: string;
  /** Fixed palette index for set_color; omitted = cycle the palette. */
  palette_index?: number;
}

export interface Keymap {
  bindings: KeyBinding[];
}

export const PALETTE_SIZE = 7;

export function parseKeymap(raw: unknown): Keymap {
  if (typeof raw !== "object" || raw === null) {
    throw new Error("keymap must be a JSON object");
  }
  const bindings = (raw as { bindings?: unknown }).bindings;
  if (!Array.isArray(bindings)) {
    throw new Error("keymap.bindings must be an array");
  }
  const seen = new Set<string>();
  const out: KeyBinding[] = [];
  for (const entry of bindings) {
    const b = entry as Partial<KeyBinding>;
    if (typeof b.code !== "string" || !b.code) {
      throw new Error("keymap binding needs a key code");
    }
    if (!COMMAND_KINDS.includes(b.command as CommandKind)) {
      throw new Error(`keymap binding for ${b.code}: unknown command ${JSON.stringify(b.command)}`);
    }
    if (seen.has(b.code)) {
      throw new Error(`keymap binds ${b.code} twice`);
    }
    seen.add(b.code);
    out.push({
      code: b.code,
      command: b.command as CommandKind,
      label: typeof b.label === "string" ? b.label : (b.command as string),
      ...(typeof b.palette_index === "number" ? { palette_index: b.palette_index } : {}),
    });
  }
  return { bindings: out };
}

export class KeyController {
  private readonly byCode = new Map<string, KeyBinding>();
  private nextPalette = 0;

  constructor(keymap: Keymap) {
    for (const b of keymap.bindings) {
      this.byCode.set(b.code, b);
    }
  }

  get bindings(): KeyBinding[] {
    return [...this.byCode.values()];
  }

  /** Resolve a key press to a command, or null for unmapped keys. */
  commandFor(code: string): ControlCommand | null {
    const binding = this.byCode.get(code);
    if (!binding) return null;
    return this.commandForBinding(binding);
  }

  /** Resolve an on-screen key click (same semantics as a key press). */
  commandForBinding(binding: KeyBinding): ControlCommand {
    if (binding.command !== "set_color") {
      return { kind: binding.command };
    }
    if (binding.palette_index !== undefined) {
      return { kind: "set_color", palette_index: binding.palette_index };
    }
    const index = this.nextPalette;
    this.nextPalette = (this.nextPalette + 1) % PALETTE_SIZE;
    return { kind: "set_color", palette_index: index };
  }
}
