/**
 * Canvas painter: draws a Scene onto a 2D context. All layout decisions
 * live in scene.ts; this file only translates primitives to pixels.
 */

import type { Scene } from "./scene.js";

const PADDING_PX = 24;

export function drawScene(ctx: CanvasRenderingContext2D, scene: Scene, width: number, height: number): void {
  ctx.clearRect(0, 0, width, height);
  ctx.fillStyle = "#101418";
  ctx.fillRect(0, 0, width, height);

  const { minX, minY, maxX, maxY } = scene.extent;
  const spanX = Math.max(maxX - minX, 1);
  const spanY = Math.max(maxY - minY, 1);
  const scale = Math.min(
    (width - 2 * PADDING_PX) / spanX,
    (height - 2 * PADDING_PX) / spanY,
  );
  // Room y grows upward; canvas y grows downward.
  const toX = (x: number) => PADDING_PX + (x - minX) * scale;
  const toY = (y: number) => height - PADDING_PX - (y - minY) * scale;

  for (const arena of scene.arenas) {
    ctx.strokeStyle = "#3a4450";
    ctx.lineWidth = 2;
    ctx.strokeRect(
      toX(arena.x),
      toY(arena.y + arena.side),
      arena.side * scale,
      arena.side * scale,
    );
  }

  ctx.font = "11px sans-serif";
  ctx.textAlign = "center";
  ctx.textBaseline = "middle";
  for (const wall of scene.walls) {
    ctx.fillStyle = wall.highlighted ? "#ffd166" : "#6b7684";
    ctx.fillText(`${wall.name}:${wall.instrument}`, toX(wall.x), toY(wall.y));
  }

  for (const robot of scene.robots) {
    const px = toX(robot.x);
    const py = toY(robot.y);
    const pr = robot.radius * scale;
    ctx.fillStyle = `hsl(${robot.hue}, 85%, 55%)`;
    ctx.beginPath();
    ctx.arc(px, py, pr, 0, 2 * Math.PI);
    ctx.fill();
    // Heading tick so spins and turnarounds are visible.
    ctx.strokeStyle = "#e8edf2";
    ctx.lineWidth = 2;
    ctx.beginPath();
    ctx.moveTo(px, py);
    ctx.lineTo(
      px + 1.6 * pr * Math.cos(robot.heading),
      py - 1.6 * pr * Math.sin(robot.heading),
    );
    ctx.stroke();
    ctx.fillStyle = "#aeb8c2";
    ctx.fillText(`${robot.robot} (${robot.mode})`, px, py + pr + 10);
  }

  // Metronome phase bar along the bottom edge.
  ctx.fillStyle = "#2e7d32";
  ctx.fillRect(0, height - 4, width * scene.clockPhase, 4);

  if (scene.status !== "connected") {
    ctx.fillStyle = "#ef5350";
    ctx.font = "16px sans-serif";
    ctx.textAlign = "left";
    ctx.fillText(`${scene.status}…`, 12, 20);
  }
}
