// Typed client for the study service, with an ordered retry queue for
// result submissions: network failures re-queue, deterministic rejections
// (4xx) surface immediately.

import type { QuestionnaireAnswers, StudyPlan, TaskResult, TaskSpec } from "./types.js";

export class ApiError extends Error {
  status: number;
  detail: unknown;

  constructor(status: number, detail: unknown) {
    super(`api error ${status}: ${JSON.stringify(detail)}`);
    this.status = status;
    this.detail = detail;
  }
}

async function asJson(response: Response): Promise<unknown> {
  const body = await response.json().catch(() => null);
  if (!response.ok) throw new ApiError(response.status, body);
  return body;
}

export class ApiClient {
  base: string;

  constructor(base = "") {
    this.base = base.replace(/\/$/, "");
  }

  async plan(participant: string, passNo: number): Promise<StudyPlan> {
    const response = await fetch(
      `${this.base}/api/plan?participant=${encodeURIComponent(participant)}&pass=${passNo}`);
    return (await asJson(response)) as StudyPlan;
  }

  async task(taskId: string): Promise<TaskSpec> {
    const response = await fetch(`${this.base}/api/task/${encodeURIComponent(taskId)}`);
    return (await asJson(response)) as TaskSpec;
  }

  audioUrl(sampleId: string): string {
    return `${this.base}/api/audio/${encodeURIComponent(sampleId)}`;
  }

  textureUrl(sampleId: string): string {
    return `${this.base}/api/texture/${encodeURIComponent(sampleId)}.png`;
  }

  async postResult(result: TaskResult): Promise<unknown> {
    const response = await fetch(`${this.base}/api/result`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(result),
    });
    return asJson(response);
  }

  async postQuestionnaire(questionnaire: string, participant: string, passNo: number,
                          answers: QuestionnaireAnswers): Promise<unknown> {
    const response = await fetch(`${this.base}/api/questionnaire`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({
        questionnaire, participant_id: participant, pass: passNo, answers,
      }),
    });
    return asJson(response);
  }
}

type QueueEntry = { result: TaskResult; resolve: () => void; reject: (e: unknown) => void };

/** Posts results in order; network failures retry with backoff, the study advances. */
export class ResultQueue {
  private api: ApiClient;
  private queue: QueueEntry[] = [];
  private draining = false;
  private backoffMs: number;

  onError: ((error: unknown) => void) | null = null;

  constructor(api: ApiClient, backoffMs = 1000) {
    this.api = api;
    this.backoffMs = backoffMs;
  }

  get pending(): number {
    return this.queue.length;
  }

  submit(result: TaskResult): Promise<void> {
    return new Promise((resolve, reject) => {
      this.queue.push({ result, resolve, reject });
      void this.drain();
    });
  }

  private async drain(): Promise<void> {
    if (this.draining) return;
    this.draining = true;
    while (this.queue.length > 0) {
      const entry = this.queue[0];
      try {
        await this.api.postResult(entry.result);
        this.queue.shift();
        entry.resolve();
      } catch (error) {
        if (error instanceof ApiError) {
          // Deterministic rejection: drop from the queue, surface, move on.
          this.queue.shift();
          if (this.onError) this.onError(error);
          entry.reject(error);
        } else {
          await new Promise((r) => setTimeout(r, this.backoffMs));
        }
      }
    }
    this.draining = false;
  }
}
