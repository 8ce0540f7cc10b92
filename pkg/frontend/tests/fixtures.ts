import type { AudioPort } from "../src/engine.js";
import type { Scene, SceneSample, TaskSpec } from "../src/types.js";

export function gridScene(labelMode: Scene["label_mode"] = "baseline"): Scene {
  const samples: SceneSample[] = [];
  let k = 0;
  for (let row = 0; row < 5; row++) {
    for (let col = 0; col < 6; col++) {
      samples.push({ id: `s${k++}`, x: 120 + col * 110, y: 120 + row * 140 });
    }
  }
  return {
    scene_id: "fixture",
    canvas: { w: 800, h: 800, margin: 40, diameter: 64 },
    placement_mode: "random",
    label_mode: labelMode,
    samples,
    seed: 0,
  };
}

export function fixtureTask(target = "s7", corner: 0 | 1 | 2 | 3 = 0): TaskSpec {
  return {
    task_id: "fixture-task",
    scene: gridScene(),
    target_id: target,
    start_corner: corner,
    phase: "evaluation",
  };
}

export class FakeAudio implements AudioPort {
  calls: { op: "play" | "stop"; id?: string }[] = [];
  playing: string | null = null;

  play(id: string): void {
    this.calls.push({ op: "play", id });
    this.playing = id;
  }

  stop(): void {
    this.calls.push({ op: "stop" });
    this.playing = null;
  }
}

/** Walk the engine's cursor in straight segments sampled every few px. */
export function moveAlong(engine: { cursorMove(t: number, x: number, y: number): void },
                          t0: number, from: [number, number], to: [number, number],
                          stepPx = 8, speedPxPerMs = 1.2): number {
  const length = Math.hypot(to[0] - from[0], to[1] - from[1]);
  const steps = Math.max(1, Math.ceil(length / stepPx));
  let t = t0;
  for (let i = 1; i <= steps; i++) {
    const x = from[0] + ((to[0] - from[0]) * i) / steps;
    const y = from[1] + ((to[1] - from[1]) * i) / steps;
    t += length / steps / speedPxPerMs;
    engine.cursorMove(t, x, y);
  }
  return t;
}
