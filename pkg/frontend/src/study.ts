// Study progression: walks the plan's steps in order, persists progress so a
// reload resumes at the first incomplete step, and carries the questionnaire
// form definitions (kept in sync with the service's validation rules).

import type { PlanStep, StudyPlan } from "./types.js";

export interface StoragePort {
  get(key: string): string | null;
  set(key: string, value: string): void;
}

export interface QuestionnaireItem {
  id: string;
  prompt: string;
  kind: "likert" | "number" | "choice" | "text";
  options?: string[];
  optional?: boolean;
}

const STRATEGY_ITEMS: QuestionnaireItem[] = [
  { id: "strategy_sequential", kind: "likert",
    prompt: "I listened to the samples one by one in a fixed pattern" },
  { id: "strategy_position", kind: "likert",
    prompt: "I used the position of the samples to guide my search" },
  { id: "strategy_labels", kind: "likert",
    prompt: "I used the appearance of the samples to guide my search" },
  { id: "position_consistent", kind: "likert",
    prompt: "Similar sounds were located closer together" },
  { id: "labels_consistent", kind: "likert",
    prompt: "Similar sounds looked similar" },
  { id: "placement_helpful", kind: "likert",
    prompt: "The placement of the samples helped me find the target" },
  { id: "labels_helpful", kind: "likert",
    prompt: "The appearance of the samples helped me find the target" },
  { id: "difficulty", kind: "likert", prompt: "Overall, the tasks were difficult" },
  { id: "comments", kind: "text", prompt: "Comments (optional)", optional: true },
];

export const QUESTIONNAIRES: Record<string, QuestionnaireItem[]> = {
  Q0: [
    { id: "age", prompt: "Your age", kind: "number" },
    { id: "years_experience", prompt: "Years of experience working with sound",
      kind: "number" },
    { id: "listening", prompt: "Listening setup for this session", kind: "choice",
      options: ["headphones", "speakers", "other"] },
    { id: "hearing_notes", prompt: "Any known hearing issues (optional)",
      kind: "text", optional: true },
  ],
  Q1: STRATEGY_ITEMS,
  Q2: STRATEGY_ITEMS,
};

export const PHASE_INSTRUCTIONS: Record<string, string> = {
  practice:
    "Practice round. Hover over a sample to hear it; press the space bar to " +
    "replay the target sound; click the sample you think is the target. You " +
    "can repeat the practice until the interface feels familiar.",
  familiarization:
    "Familiarization. Take your time and explore the set of samples while " +
    "you search for the target sound.",
  evaluation:
    "Evaluation. Find the target sound as quickly as you can.",
};

export interface Progress {
  stepIndex: number;
  taskIndex: number;
}

/** Position in the plan: step by step, task by task, resumable. */
export class StudyDriver {
  readonly plan: StudyPlan;
  private storage: StoragePort;
  private key: string;
  progress: Progress;

  constructor(plan: StudyPlan, storage: StoragePort) {
    this.plan = plan;
    this.storage = storage;
    this.key = `timbrespace:${plan.participant_id}:${plan.pass}`;
    const saved = storage.get(this.key);
    this.progress = saved ? (JSON.parse(saved) as Progress)
                          : { stepIndex: 0, taskIndex: 0 };
  }

  private save(): void {
    this.storage.set(this.key, JSON.stringify(this.progress));
  }

  get finished(): boolean {
    return this.progress.stepIndex >= this.plan.steps.length;
  }

  get currentStep(): PlanStep | null {
    return this.finished ? null : this.plan.steps[this.progress.stepIndex];
  }

  /** Task id to run now, or null when the current step is a questionnaire. */
  get currentTaskId(): string | null {
    const step = this.currentStep;
    if (!step || step.kind !== "task_set") return null;
    return step.task_ids![this.progress.taskIndex];
  }

  completeQuestionnaire(): void {
    const step = this.currentStep;
    if (!step || step.kind !== "questionnaire") throw new Error("no questionnaire due");
    this.progress = { stepIndex: this.progress.stepIndex + 1, taskIndex: 0 };
    this.save();
  }

  /** Advance after a finished task; practice may be repeated instead. */
  completeTask(repeatPractice = false): void {
    const step = this.currentStep;
    if (!step || step.kind !== "task_set") throw new Error("no task due");
    if (repeatPractice) {
      if (step.phase !== "practice") throw new Error("only practice repeats");
      this.save();
      return;
    }
    const nextTask = this.progress.taskIndex + 1;
    if (nextTask < step.task_ids!.length) {
      this.progress = { ...this.progress, taskIndex: nextTask };
    } else {
      this.progress = { stepIndex: this.progress.stepIndex + 1, taskIndex: 0 };
    }
    this.save();
  }
}
