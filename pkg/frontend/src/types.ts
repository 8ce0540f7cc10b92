// Wire types matching the study service's JSON payloads.

export interface CanvasSpec {
  w: number;
  h: number;
  margin: number;
  diameter: number;
}

export interface SceneSample {
  id: string;
  x: number;
  y: number;
  shape_path?: number[][];
  color_hsl?: [number, number, number];
  texture_ref?: string;
}

export type PlacementMode = "dr" | "random";
export type LabelMode = "baseline" | "shape" | "color" | "texture";
export type Phase = "practice" | "familiarization" | "evaluation";

export interface Scene {
  scene_id: string;
  canvas: CanvasSpec;
  placement_mode: PlacementMode;
  label_mode: LabelMode;
  samples: SceneSample[];
  seed: number;
}

export interface TaskSpec {
  task_id: string;
  scene: Scene;
  target_id: string;
  start_corner: 0 | 1 | 2 | 3;
  phase: Phase;
}

export interface TaskResult {
  task_id: string;
  participant_id: string;
  completion_time: number;
  hovered_events: number;
  hovered_unique: number;
  distance: number;
  trajectory: [number, number, number][]; // (t seconds, x, y)
  misclicks: number;
  target_replays: number;
  completed: boolean;
}

export interface PlanStep {
  code: string;
  kind: "questionnaire" | "task_set";
  placement_mode?: PlacementMode;
  label_mode?: LabelMode;
  phase?: Phase;
  task_ids?: string[];
}

export interface StudyPlan {
  participant_id: string;
  pass: number;
  label_mode: Exclude<LabelMode, "baseline">;
  steps: PlanStep[];
}

export type QuestionnaireAnswers = Record<string, number | string>;
