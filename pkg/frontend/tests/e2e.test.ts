// Full-stack conformance: boots the real study service, completes an entire
// single-pass study through the TypeScript engine and API client (the same
// code the browser runs), and checks that every posted result is accepted by
// the server's revalidation and that the interaction invariants hold.

import { spawn, execFileSync, type ChildProcess } from "node:child_process";
import { mkdtempSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join, resolve } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { CORNER_DWELL_MS, TaskEngine } from "../src/engine.js";
import { inCorner } from "../src/geometry.js";
import { QUESTIONNAIRES } from "../src/study.js";
import type { PlanStep, QuestionnaireAnswers, TaskSpec } from "../src/types.js";
import { FakeAudio, moveAlong } from "./fixtures.js";

const REPO_ROOT = resolve(__dirname, "../..");
const PORT = 8791;
const BASE = `http://127.0.0.1:${PORT}`;

let server: ChildProcess | null = null;
let workDir = "";
const api = new ApiClient(BASE);

async function waitForServer(timeoutMs = 120_000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    try {
      const response = await fetch(`${BASE}/api/library`);
      if (response.ok) return;
    } catch {
      // not up yet
    }
    await new Promise((r) => setTimeout(r, 1000));
  }
  throw new Error("study service did not come up");
}

beforeAll(async () => {
  workDir = mkdtempSync(join(tmpdir(), "timbrespace-e2e-"));
  execFileSync("python3", [
    join(REPO_ROOT, "scripts", "build_demo_library.py"),
    "--out", join(workDir, "library"), "--n", "36", "--duration", "1.0",
    "--seed", "3",
  ], { cwd: REPO_ROOT });
  server = spawn("python3", [
    "-m", "timbrespace.cli", "serve",
    "--library", join(workDir, "library"),
    "--data", join(workDir, "data"),
    "--port", String(PORT),
  ], { cwd: REPO_ROOT, stdio: "ignore" });
  await waitForServer();
});

afterAll(() => {
  if (server) server.kill();
  if (workDir) rmSync(workDir, { recursive: true, force: true });
});

function cornerSpot(task: TaskSpec): [number, number] {
  const { w, h } = task.scene.canvas;
  const spots: [number, number][] = [[24, 24], [w - 24, 24], [w - 24, h - 24],
                                     [24, h - 24]];
  return spots[task.start_corner];
}

/** Nearest-unvisited-neighbor sweep, like a participant scanning the field. */
function driveTask(task: TaskSpec): TaskEngine {
  const engine = new TaskEngine(task, new FakeAudio());
  const [cx, cy] = cornerSpot(task);
  engine.cursorMove(0, cx, cy);
  engine.cursorMove(CORNER_DWELL_MS + 5, cx, cy);
  if ((engine.state as string) !== "running") throw new Error("arming failed");
  let t = CORNER_DWELL_MS + 10;
  let position: [number, number] = [cx, cy];
  const unvisited = new Map(task.scene.samples.map((s) => [s.id, s]));
  while (unvisited.size > 0) {
    let nearest = null as { id: string; x: number; y: number } | null;
    let best = Infinity;
    for (const s of unvisited.values()) {
      const d = Math.hypot(s.x - position[0], s.y - position[1]);
      if (d < best) {
        best = d;
        nearest = s;
      }
    }
    const next: [number, number] = [nearest!.x, nearest!.y];
    t = moveAlong(engine, t, position, next);
    t += 300; // audition dwell
    position = next;
    unvisited.delete(nearest!.id);
    if (nearest!.id === task.target_id) {
      engine.keySpace(t);
      t += 50;
      engine.click(t, next[0], next[1]);
      break;
    }
  }
  if ((engine.state as string) !== "done") throw new Error("target never reached");
  return engine;
}

function answersFor(code: string): QuestionnaireAnswers {
  const answers: QuestionnaireAnswers = {};
  for (const item of QUESTIONNAIRES[code]) {
    if (item.kind === "likert") answers[item.id] = 3;
    else if (item.kind === "number") answers[item.id] = 4;
    else if (item.kind === "choice") answers[item.id] = item.options![0];
  }
  return answers;
}

function checkSceneAssets(task: TaskSpec): void {
  expect(task.scene.samples).toHaveLength(30);
  for (const s of task.scene.samples) {
    if (task.scene.label_mode === "shape") {
      expect(s.shape_path).toBeDefined();
      expect(s.shape_path!).toHaveLength(402);
    } else if (task.scene.label_mode === "color") {
      expect(s.color_hsl).toBeDefined();
    } else if (task.scene.label_mode === "texture") {
      expect(s.texture_ref).toBe(s.id);
    }
  }
}

function checkInvariants(task: TaskSpec, engine: TaskEngine): void {
  const first = engine.log.find((e) => e.type === "cursor");
  expect(first && first.type === "cursor"
         && inCorner(task.scene.canvas, task.start_corner, first.x, first.y)).toBe(true);
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
}

describe("full study pass against the live service", () => {
  const participant = "e2e-ts";
  const seenLabelModes = new Set<string>();

  it("completes every step and every result passes server revalidation", async () => {
    const plan = await api.plan(participant, 1);
    expect(plan.steps.map((s) => s.code))
      .toEqual(["Q0", "P", "B_R", "B_DR", "L_DR", "Q1", "L_R", "Q2"]);
    for (const step of plan.steps as PlanStep[]) {
      if (step.kind === "questionnaire") {
        await api.postQuestionnaire(step.code, participant, 1, answersFor(step.code));
        continue;
      }
      for (const taskId of step.task_ids!) {
        const task = await api.task(taskId);
        expect(task.start_corner).toBe(
          Number(taskId.split(":")[3]) % 4);
        checkSceneAssets(task);
        seenLabelModes.add(task.scene.label_mode);
        const engine = driveTask(task);
        checkInvariants(task, engine);
        const ack = await api.postResult(engine.buildResult(participant));
        expect((ack as { status: string }).status).toBe("ok");
      }
    }
    const exported = await (await fetch(`${BASE}/api/export`)).text();
    const lines = exported.trim().split("\n");
    expect(lines.length).toBe(29); // 1 practice + 4 sets x 7
  }, 180_000);

  it("color and texture scenes from later passes carry render-ready assets", async () => {
    for (const passNo of [2, 3]) {
      const plan = await api.plan(participant, passNo);
      const labelled = plan.steps.find((s) => s.code === "L_DR")!;
      const task = await api.task(labelled.task_ids![0]);
      checkSceneAssets(task);
      seenLabelModes.add(task.scene.label_mode);
      if (task.scene.label_mode === "texture") {
        const sid = task.scene.samples[0].id;
        const png = await fetch(api.textureUrl(sid));
        expect(png.ok).toBe(true);
        expect(png.headers.get("content-type")).toBe("image/png");
      }
    }
    expect(seenLabelModes).toEqual(new Set(["baseline", "shape", "color", "texture"]));
  }, 120_000);

  it("server rejects a result whose reported distance is inflated", async () => {
    const plan = await api.plan(participant, 1);
    const step = plan.steps.find((s) => s.code === "B_R")!;
    const task = await api.task(step.task_ids![1]);
    const engine = driveTask(task);
    const result = engine.buildResult("e2e-tamper");
    result.distance *= 1.05;
    await expect(api.postResult(result)).rejects.toMatchObject({ status: 422 });
  }, 60_000);
});
