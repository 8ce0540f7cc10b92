// Shared hit-testing and trajectory math. The server recomputes distance and
// hover counts from the posted trajectory with these same rules, so the
// client-side numbers must be derived from exactly the logged samples.

import type { CanvasSpec, Scene, SceneSample } from "./types.js";

export const CORNER_ZONE = 48; // px, square arming zone in each canvas corner

export function hitRadius(canvas: CanvasSpec): number {
  return canvas.diameter / 2;
}

/** Sample whose hit disc contains (x, y); nearest center wins on overlap. */
export function sampleAt(scene: Scene, x: number, y: number): SceneSample | null {
  const r = hitRadius(scene.canvas);
  let best: SceneSample | null = null;
  let bestDist = Infinity;
  for (const s of scene.samples) {
    const d = Math.hypot(s.x - x, s.y - y);
    if (d <= r && d < bestDist) {
      best = s;
      bestDist = d;
    }
  }
  return best;
}

export function cornerRect(canvas: CanvasSpec, corner: number):
    { x0: number; y0: number; x1: number; y1: number } {
  const z = CORNER_ZONE;
  switch (corner) {
    case 0: return { x0: 0, y0: 0, x1: z, y1: z };
    case 1: return { x0: canvas.w - z, y0: 0, x1: canvas.w, y1: z };
    case 2: return { x0: canvas.w - z, y0: canvas.h - z, x1: canvas.w, y1: canvas.h };
    default: return { x0: 0, y0: canvas.h - z, x1: z, y1: canvas.h };
  }
}

export function inCorner(canvas: CanvasSpec, corner: number, x: number, y: number): boolean {
  const r = cornerRect(canvas, corner);
  return x >= r.x0 && x <= r.x1 && y >= r.y0 && y <= r.y1;
}

export function pathLength(points: [number, number, number][]): number {
  let total = 0;
  for (let i = 1; i < points.length; i++) {
    total += Math.hypot(points[i][1] - points[i - 1][1],
                        points[i][2] - points[i - 1][2]);
  }
  return total;
}

/** Hover entries implied by a trajectory: enter = inside after being outside. */
export function hoverCounts(scene: Scene, points: [number, number, number][]):
    { events: number; unique: number } {
  const r = hitRadius(scene.canvas);
  let events = 0;
  const seen = new Set<string>();
  const inside = new Map<string, boolean>();
  for (const s of scene.samples) inside.set(s.id, false);
  for (const [, x, y] of points) {
    for (const s of scene.samples) {
      const now = Math.hypot(s.x - x, s.y - y) <= r;
      if (now && !inside.get(s.id)) {
        events += 1;
        seen.add(s.id);
      }
      inside.set(s.id, now);
    }
  }
  return { events, unique: seen.size };
}
