import { describe, expect, it } from "vitest";

import type { RobotSnapshot } from "../src/protocol.js";
import { ARENA_SIDE, buildScene } from "../src/scene.js";
import { AppState } from "../src/state.js";

function stateWith(robots: Partial<RobotSnapshot>[]): AppState {
  const state = new AppState();
  state.apply({
    kind: "snapshot",
    seq: 0,
    t: 0,
    clock_phase: 0.25,
    protocol_version: 1,
    robots: robots.map((r, i) => ({
      id: i,
      x: 5,
      y: 5,
      heading: 0,
      mode: "performing",
      hue: 0,
      primary_wall: 0,
      arena_position: [0, 0] as [number, number],
      ...r,
    })),
  });
  return state;
}

describe("buildScene", () => {
  it("places a robot at (5,5) at its arena's center", () => {
    const scene = buildScene(stateWith([{ x: 5, y: 5, arena_position: [14, 14] }]));
    expect(scene.robots[0].x).toBeCloseTo(14 + ARENA_SIDE / 2);
    expect(scene.robots[0].y).toBeCloseTo(14 + ARENA_SIDE / 2);
  });

  it("draws four arenas at their configured layout positions", () => {
    const scene = buildScene(
      stateWith([
        { arena_position: [0, 0] },
        { arena_position: [14, 0] },
        { arena_position: [0, 14] },
        { arena_position: [14, 14] },
      ]),
    );
    expect(scene.arenas).toHaveLength(4);
    expect(scene.arenas.map((a) => [a.x, a.y])).toEqual([
      [0, 0], [14, 0], [0, 14], [14, 14],
    ]);
    expect(scene.extent.maxX).toBe(24);
    expect(scene.walls).toHaveLength(16);
  });

  it("highlights exactly the primary wall and rotates with it", () => {
    const before = buildScene(stateWith([{ primary_wall: 0 }]));
    const highlightedBefore = before.walls.filter((w) => w.highlighted);
    expect(highlightedBefore).toHaveLength(1);
    expect(highlightedBefore[0].wall).toBe(0);

    // switch_instrument advances the primary wall by 90 degrees.
    const after = buildScene(stateWith([{ primary_wall: 1 }]));
    const highlightedAfter = after.walls.filter((w) => w.highlighted);
    expect(highlightedAfter[0].wall).toBe(1);
    expect(highlightedAfter[0].instrument).not.toBe(highlightedBefore[0].instrument);
  });

  it("labels opposite walls with the same instrument", () => {
    const scene = buildScene(stateWith([{}]));
    const byWall = new Map(scene.walls.map((w) => [w.wall, w.instrument]));
    expect(byWall.get(0)).toBe(byWall.get(2));
    expect(byWall.get(1)).toBe(byWall.get(3));
    expect(byWall.get(0)).not.toBe(byWall.get(1));
  });

  it("carries hue straight from state to the dot", () => {
    const state = stateWith([{ hue: 7 }]);
    expect(buildScene(state).robots[0].hue).toBe(7);
    state.apply({ kind: "light", seq: 1, t: 1, event: { robot: 0, hue: 192, cause: "set_color" } });
    expect(buildScene(state).robots[0].hue).toBe(192);
  });
});
