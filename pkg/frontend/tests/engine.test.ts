import { describe, expect, it } from "vitest";

import { CORNER_DWELL_MS, TaskEngine } from "../src/engine.js";
import { hoverCounts, inCorner, pathLength } from "../src/geometry.js";
import { FakeAudio, fixtureTask, moveAlong } from "./fixtures.js";

function armedEngine(target = "s7", corner: 0 | 1 | 2 | 3 = 0) {
  const audio = new FakeAudio();
  const engine = new TaskEngine(fixtureTask(target, corner), audio);
  engine.cursorMove(0, 20, 20);
  engine.cursorMove(CORNER_DWELL_MS + 10, 20, 20);
  return { engine, audio };
}

describe("corner gating", () => {
  it("does not log cursor samples before arming", () => {
    const audio = new FakeAudio();
    const engine = new TaskEngine(fixtureTask(), audio);
    engine.cursorMove(0, 400, 400);
    engine.cursorMove(50, 300, 300);
    expect(engine.state).toBe("waiting");
    expect(engine.log.filter((e) => e.type === "cursor")).toHaveLength(0);
  });

  it("requires a continuous dwell inside the corner zone", () => {
    const audio = new FakeAudio();
    const engine = new TaskEngine(fixtureTask(), audio);
    engine.cursorMove(0, 20, 20);
    engine.cursorMove(200, 400, 400); // left the zone: dwell resets
    engine.cursorMove(250, 20, 20);
    engine.cursorMove(250 + CORNER_DWELL_MS - 1, 20, 20);
    expect(engine.state).toBe("waiting");
    engine.cursorMove(250 + CORNER_DWELL_MS, 20, 20);
    expect(engine.state).toBe("running");
  });

  it("first trajectory point lies in the corner zone", () => {
    for (const corner of [0, 1, 2, 3] as const) {
      const audio = new FakeAudio();
      const engine = new TaskEngine(fixtureTask("s7", corner), audio);
      const scene = engine.scene;
      const spots: [number, number][] = [
        [20, 20], [scene.canvas.w - 20, 20],
        [scene.canvas.w - 20, scene.canvas.h - 20], [20, scene.canvas.h - 20]];
      const [x, y] = spots[corner];
      engine.cursorMove(0, x, y);
      engine.cursorMove(CORNER_DWELL_MS, x, y);
      expect(engine.state).toBe("running");
      const first = engine.log.find((e) => e.type === "cursor")!;
      expect(first.type === "cursor" && inCorner(scene.canvas, corner, first.x, first.y))
        .toBe(true);
    }
  });
});

describe("hover audition", () => {
  it("plays on enter, stops on leave, one sample at a time", () => {
    const { engine, audio } = armedEngine();
    let t = moveAlong(engine, CORNER_DWELL_MS + 10, [20, 20], [120, 120]); // s0
    expect(audio.playing).toBe("s0");
    t = moveAlong(engine, t, [120, 120], [230, 120]); // s1
    expect(audio.playing).toBe("s1");
    moveAlong(engine, t, [230, 120], [230, 200]); // gap between rows
    expect(audio.playing).toBe(null);

    // audio exclusivity: reconstruct play intervals from the log
    const open = new Map<string, number>();
    const intervals: [number, number][] = [];
    for (const entry of engine.log) {
      if (entry.type === "play") open.set(entry.id, entry.t);
      if (entry.type === "stop") {
        const start = open.get(entry.id);
        if (start !== undefined) intervals.push([start, entry.t]);
        open.delete(entry.id);
      }
    }
    intervals.sort((a, b) => a[0] - b[0]);
    for (let i = 1; i < intervals.length; i++) {
      expect(intervals[i][0]).toBeGreaterThanOrEqual(intervals[i - 1][1]);
    }
  });

  it("restarts playback on re-enter", () => {
    const { engine, audio } = armedEngine();
    let t = moveAlong(engine, CORNER_DWELL_MS + 10, [20, 20], [120, 120]);
    t = moveAlong(engine, t, [120, 120], [120, 200]);
    moveAlong(engine, t, [120, 200], [120, 120]);
    const plays = audio.calls.filter((c) => c.op === "play" && c.id === "s0");
    expect(plays).toHaveLength(2);
  });
});

describe("clicks and completion", () => {
  it("misclick flashes and continues; target completes", () => {
    const { engine } = armedEngine("s1");
    let t = moveAlong(engine, CORNER_DWELL_MS + 10, [20, 20], [120, 120]);
    engine.click(t, 120, 120); // wrong sample (s0)
    expect(engine.state).toBe("running");
    expect(engine.misclickFlash?.id).toBe("s0");
    t = moveAlong(engine, t, [120, 120], [230, 120]);
    engine.click(t, 230, 120); // target s1
    expect(engine.state).toBe("done");
    const result = engine.buildResult("p1");
    expect(result.misclicks).toBe(1);
    expect(result.completed).toBe(true);
    expect(result.completion_time).toBeGreaterThan(0);
  });

  it("clicking empty canvas does nothing", () => {
    const { engine } = armedEngine();
    const t = moveAlong(engine, CORNER_DWELL_MS + 10, [20, 20], [60, 60]);
    engine.click(t, 60, 60);
    expect(engine.state).toBe("running");
    expect(() => engine.buildResult("p1")).toThrow();
  });

  it("space bar replays the target and counts", () => {
    const { engine, audio } = armedEngine("s3");
    const t = moveAlong(engine, CORNER_DWELL_MS + 10, [20, 20], [120, 120]);
    engine.keySpace(t + 10);
    engine.keySpace(t + 500);
    expect(audio.playing).toBe("s3");
    moveAlong(engine, t + 600, [120, 120], [450, 120]);
    engine.click(t + 2000, 450, 120);
    const result = engine.buildResult("p1");
    expect(result.target_replays).toBe(2);
  });
});

describe("result consistency (mirrors server revalidation)", () => {
  it("distance and hover counts equal an independent recomputation", () => {
    const { engine } = armedEngine("s13"); // row 2, col 1 -> (230, 400)
    let t = moveAlong(engine, CORNER_DWELL_MS + 10, [20, 20], [120, 120]);
    t = moveAlong(engine, t, [120, 120], [340, 260]);
    t = moveAlong(engine, t, [340, 260], [230, 400]);
    engine.click(t, 230, 400);
    expect(engine.state).toBe("done");
    const result = engine.buildResult("p1");
    expect(result.distance).toBeCloseTo(pathLength(result.trajectory), 9);
    const counts = hoverCounts(engine.scene, result.trajectory);
    expect(result.hovered_events).toBe(counts.events);
    expect(result.hovered_unique).toBe(counts.unique);
    expect(result.hovered_unique).toBeLessThanOrEqual(result.hovered_events);
    expect(result.trajectory[0][0]).toBe(0);
  });
});
