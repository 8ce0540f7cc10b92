// Task interaction state machine, independent of the DOM so the protocol
// invariants (corner gating, audio exclusivity, measure consistency) are
// unit-testable. Timestamps arrive in milliseconds (performance.now-style);
// the posted trajectory is in seconds relative to arming.

import { hoverCounts, inCorner, pathLength, sampleAt } from "./geometry.js";
import type { Scene, TaskResult, TaskSpec } from "./types.js";

export const CORNER_DWELL_MS = 400;

export interface AudioPort {
  play(sampleId: string): void;
  stop(): void;
}

export type TaskState = "waiting" | "running" | "done";

export type LogEntry =
  | { type: "cursor"; t: number; x: number; y: number }
  | { type: "hover_enter"; t: number; id: string }
  | { type: "hover_leave"; t: number; id: string }
  | { type: "play"; t: number; id: string }
  | { type: "stop"; t: number; id: string }
  | { type: "replay_target"; t: number }
  | { type: "misclick"; t: number; id: string }
  | { type: "complete"; t: number };

export class TaskEngine {
  readonly task: TaskSpec;
  readonly scene: Scene;
  state: TaskState = "waiting";
  log: LogEntry[] = [];
  hoveredId: string | null = null;
  playingId: string | null = null;
  misclickFlash: { id: string; untilMs: number } | null = null;

  private audio: AudioPort;
  private trajectory: [number, number, number][] = [];
  private armedAtMs = 0;
  private doneAtMs = 0;
  private cornerEnterMs: number | null = null;
  private misclicks = 0;
  private targetReplays = 0;

  constructor(task: TaskSpec, audio: AudioPort) {
    this.task = task;
    this.scene = task.scene;
    this.audio = audio;
  }

  private rel(nowMs: number): number {
    return (nowMs - this.armedAtMs) / 1000;
  }

  /** Progress toward arming, in [0, 1], for the corner prompt. */
  armingProgress(nowMs: number): number {
    if (this.state !== "waiting" || this.cornerEnterMs === null) return 0;
    return Math.min(1, (nowMs - this.cornerEnterMs) / CORNER_DWELL_MS);
  }

  cursorMove(nowMs: number, x: number, y: number): void {
    if (this.state === "done") return;
    if (this.state === "waiting") {
      if (inCorner(this.scene.canvas, this.task.start_corner, x, y)) {
        if (this.cornerEnterMs === null) this.cornerEnterMs = nowMs;
        if (nowMs - this.cornerEnterMs >= CORNER_DWELL_MS) this.arm(nowMs, x, y);
      } else {
        this.cornerEnterMs = null;
      }
      return;
    }
    const t = this.rel(nowMs);
    this.trajectory.push([t, x, y]);
    this.log.push({ type: "cursor", t, x, y });
    const over = sampleAt(this.scene, x, y);
    const overId = over ? over.id : null;
    if (overId !== this.hoveredId) {
      if (this.hoveredId !== null) {
        this.log.push({ type: "hover_leave", t, id: this.hoveredId });
        this.stopAudio(t);
      }
      this.hoveredId = overId;
      if (overId !== null) {
        this.log.push({ type: "hover_enter", t, id: overId });
        this.startAudio(t, overId);
      }
    }
  }

  private arm(nowMs: number, x: number, y: number): void {
    this.state = "running";
    this.armedAtMs = nowMs;
    this.trajectory.push([0, x, y]);
    this.log.push({ type: "cursor", t: 0, x, y });
  }

  keySpace(nowMs: number): void {
    if (this.state !== "running") return;
    const t = this.rel(nowMs);
    this.targetReplays += 1;
    this.log.push({ type: "replay_target", t });
    this.startAudio(t, this.task.target_id);
  }

  click(nowMs: number, x: number, y: number): void {
    if (this.state !== "running") return;
    const t = this.rel(nowMs);
    const over = sampleAt(this.scene, x, y);
    if (!over) return;
    if (over.id === this.task.target_id) {
      this.state = "done";
      this.doneAtMs = nowMs;
      this.stopAudio(t);
      this.log.push({ type: "complete", t });
    } else {
      this.misclicks += 1;
      this.misclickFlash = { id: over.id, untilMs: nowMs + 500 };
      this.log.push({ type: "misclick", t, id: over.id });
    }
  }

  private startAudio(t: number, id: string): void {
    if (this.playingId !== null) this.log.push({ type: "stop", t, id: this.playingId });
    this.audio.stop();
    this.playingId = id;
    this.audio.play(id);
    this.log.push({ type: "play", t, id });
  }

  private stopAudio(t: number): void {
    if (this.playingId === null) return;
    this.log.push({ type: "stop", t, id: this.playingId });
    this.playingId = null;
    this.audio.stop();
  }

  buildResult(participantId: string): TaskResult {
    if (this.state !== "done") throw new Error("task not complete");
    return {
      task_id: this.task.task_id,
      participant_id: participantId,
      completion_time: Math.max((this.doneAtMs - this.armedAtMs) / 1000, 0.001),
      hovered_events: hoverCounts(this.scene, this.trajectory).events,
      hovered_unique: hoverCounts(this.scene, this.trajectory).unique,
      distance: pathLength(this.trajectory),
      trajectory: this.trajectory,
      misclicks: this.misclicks,
      target_replays: this.targetReplays,
      completed: true,
    };
  }
}
