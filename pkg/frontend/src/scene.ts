/**
 * Pure scene builder: turns the current AppState into a list of drawing
 * primitives laid out in room coordinates (inches). Keeping this free of
 * canvas calls lets tests assert on exactly what a frame would show.
 */

import type { AppState } from "./state.js";

export const ARENA_SIDE = 10.0;
export const ROBOT_RADIUS = 1.45;

const WALL_NAMES = ["N", "E", "S", "W"] as const;
// Opposite walls carry the same instrument: drums on N/S, tambourines on E/W.
const WALL_INSTRUMENTS = ["frame drum", "tambourine", "frame drum", "tambourine"] as const;

export interface ArenaBox {
  robot: number;
  x: number;
  y: number;
  side: number;
}

export interface WallLabel {
  robot: number;
  wall: number;
  name: string;
  instrument: string;
  /** Label midpoint in room coordinates. */
  x: number;
  y: number;
  highlighted: boolean;
}

export interface RobotDot {
  robot: number;
  x: number;
  y: number;
  radius: number;
  heading: number;
  hue: number;
  mode: string;
}

export interface Scene {
  status: string;
  clockPhase: number;
  arenas: ArenaBox[];
  walls: WallLabel[];
  robots: RobotDot[];
  /** Room-coordinate bounding box, for fitting the canvas. */
  extent: { minX: number; minY: number; maxX: number; maxY: number };
}

function wallMidpoint(ox: number, oy: number, wall: number): [number, number] {
  const h = ARENA_SIDE / 2;
  switch (wall) {
    case 0: return [ox + h, oy + ARENA_SIDE]; // north
    case 1: return [ox + ARENA_SIDE, oy + h]; // east
    case 2: return [ox + h, oy]; // south
    default: return [ox, oy + h]; // west
  }
}

export function buildScene(state: AppState): Scene {
  const arenas: ArenaBox[] = [];
  const walls: WallLabel[] = [];
  const robots: RobotDot[] = [];
  let minX = 0, minY = 0, maxX = ARENA_SIDE, maxY = ARENA_SIDE;

  for (const r of state.robots) {
    const [ox, oy] = r.arena_position;
    arenas.push({ robot: r.id, x: ox, y: oy, side: ARENA_SIDE });
    minX = Math.min(minX, ox);
    minY = Math.min(minY, oy);
    maxX = Math.max(maxX, ox + ARENA_SIDE);
    maxY = Math.max(maxY, oy + ARENA_SIDE);
    for (let wall = 0; wall < 4; wall++) {
      const [wx, wy] = wallMidpoint(ox, oy, wall);
      walls.push({
        robot: r.id,
        wall,
        name: WALL_NAMES[wall],
        instrument: WALL_INSTRUMENTS[wall],
        x: wx,
        y: wy,
        highlighted: wall === r.primary_wall,
      });
    }
    robots.push({
      robot: r.id,
      x: ox + r.x,
      y: oy + r.y,
      radius: ROBOT_RADIUS,
      heading: r.heading,
      hue: r.hue,
      mode: r.mode,
    });
  }

  return {
    status: state.status,
    clockPhase: state.clockPhase,
    arenas,
    walls,
    robots,
    extent: { minX, minY, maxX, maxY },
  };
}
