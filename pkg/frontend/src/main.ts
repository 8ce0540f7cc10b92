// Browser entry point: participant sign-in, study traversal, task loop,
// questionnaire forms, and result submission with retries.

import { ApiClient, ResultQueue } from "./api.js";
import { WebAudio } from "./audio.js";
import { TaskEngine } from "./engine.js";
import { SceneRenderer } from "./render.js";
import { PHASE_INSTRUCTIONS, QUESTIONNAIRES, StudyDriver } from "./study.js";
import type { PlanStep, QuestionnaireAnswers } from "./types.js";

const api = new ApiClient("");
const queue = new ResultQueue(api);
const app = document.getElementById("app")!;
const status = document.getElementById("status")!;

queue.onError = (error) => {
  status.textContent = `submission rejected: ${String(error)}`;
};

function clear(): void {
  app.replaceChildren();
}

function button(label: string, onClick: () => void): HTMLButtonElement {
  const b = document.createElement("button");
  b.textContent = label;
  b.addEventListener("click", onClick);
  return b;
}

function screen(title: string, body: string): HTMLDivElement {
  const div = document.createElement("div");
  div.className = "screen";
  const h = document.createElement("h2");
  h.textContent = title;
  const p = document.createElement("p");
  p.textContent = body;
  div.append(h, p);
  return div;
}

async function start(): Promise<void> {
  clear();
  const div = screen("Sample search study", "Enter a participant id to begin or resume.");
  const input = document.createElement("input");
  input.placeholder = "participant id";
  input.value = localStorage.getItem("timbrespace:last-participant") ?? "";
  const passInput = document.createElement("input");
  passInput.type = "number";
  passInput.min = "1";
  passInput.max = "3";
  passInput.value = "1";
  div.append(input, document.createTextNode(" pass: "), passInput,
             button("Start", () => {
               const participant = input.value.trim();
               if (!participant) return;
               localStorage.setItem("timbrespace:last-participant", participant);
               void runStudy(participant, Number(passInput.value));
             }));
  app.append(div);
}

async function runStudy(participant: string, passNo: number): Promise<void> {
  status.textContent = "loading plan...";
  const plan = await api.plan(participant, passNo);
  const driver = new StudyDriver(plan, {
    get: (k) => localStorage.getItem(k),
    set: (k, v) => localStorage.setItem(k, v),
  });
  status.textContent = `labels this pass: ${plan.label_mode}`;
  await nextStep(driver, participant, passNo);
}

async function nextStep(driver: StudyDriver, participant: string,
                        passNo: number): Promise<void> {
  const step = driver.currentStep;
  if (!step) {
    clear();
    app.append(screen("Done", "The study pass is complete. Thank you!"));
    return;
  }
  if (step.kind === "questionnaire") {
    showQuestionnaire(step, driver, participant, passNo);
  } else {
    await runTask(step, driver, participant, passNo);
  }
}

function showQuestionnaire(step: PlanStep, driver: StudyDriver,
                           participant: string, passNo: number): void {
  clear();
  const items = QUESTIONNAIRES[step.code] ?? [];
  const div = screen(`Questionnaire ${step.code}`,
                     "Answer every scale; comments are optional.");
  const form = document.createElement("form");
  for (const item of items) {
    const row = document.createElement("div");
    row.className = "q-row";
    const label = document.createElement("label");
    label.textContent = item.prompt;
    row.append(label);
    if (item.kind === "likert") {
      for (let v = 1; v <= 5; v++) {
        const radio = document.createElement("input");
        radio.type = "radio";
        radio.name = item.id;
        radio.value = String(v);
        row.append(radio, document.createTextNode(String(v)));
      }
    } else if (item.kind === "number") {
      const input = document.createElement("input");
      input.type = "number";
      input.name = item.id;
      input.min = "0";
      row.append(input);
    } else if (item.kind === "choice") {
      const select = document.createElement("select");
      select.name = item.id;
      for (const option of item.options ?? []) {
        const el = document.createElement("option");
        el.value = option;
        el.textContent = option;
        select.append(el);
      }
      row.append(select);
    } else {
      const input = document.createElement("input");
      input.type = "text";
      input.name = item.id;
      row.append(input);
    }
    form.append(row);
  }
  form.append(button("Submit", () => {
    const data = new FormData(form);
    const answers: QuestionnaireAnswers = {};
    for (const item of items) {
      const raw = data.get(item.id);
      if (raw === null || raw === "") continue;
      answers[item.id] = item.kind === "likert" || item.kind === "number"
        ? Number(raw) : String(raw);
    }
    api.postQuestionnaire(step.code, participant, passNo, answers).then(() => {
      driver.completeQuestionnaire();
      void nextStep(driver, participant, passNo);
    }).catch((error) => {
      status.textContent = `questionnaire rejected: ${String(error)}`;
    });
  }));
  div.append(form);
  app.append(div);
}

async function runTask(step: PlanStep, driver: StudyDriver, participant: string,
                       passNo: number): Promise<void> {
  clear();
  const taskId = driver.currentTaskId!;
  status.textContent = `loading task ${taskId}...`;
  const task = await api.task(taskId);
  const intro = screen(`Task set ${step.code}`,
                       PHASE_INSTRUCTIONS[task.phase] ?? "");
  app.append(intro);

  const audio = new WebAudio();
  const canvas = document.createElement("canvas");
  canvas.className = "scene";
  app.append(canvas);
  const renderer = new SceneRenderer(canvas);
  status.textContent = "preloading audio...";
  await Promise.all([
    audio.preload(api, task.scene.samples.map((s) => s.id)),
    renderer.preloadTextures(task.scene, (id) => api.textureUrl(id)),
  ]);
  status.textContent = "hold the cursor in the highlighted corner to start";

  const engine = new TaskEngine(task, audio);
  const toCanvas = (event: MouseEvent): [number, number] => {
    const rect = canvas.getBoundingClientRect();
    return [(event.clientX - rect.left) * (canvas.width / rect.width),
            (event.clientY - rect.top) * (canvas.height / rect.height)];
  };
  canvas.addEventListener("mousemove", (event) => {
    const [x, y] = toCanvas(event);
    engine.cursorMove(performance.now(), x, y);
  });
  canvas.addEventListener("click", (event) => {
    const [x, y] = toCanvas(event);
    engine.click(performance.now(), x, y);
  });
  const onKey = (event: KeyboardEvent): void => {
    if (event.code === "Space") {
      event.preventDefault();
      engine.keySpace(performance.now());
    }
  };
  window.addEventListener("keydown", onKey);

  const loop = (): void => {
    renderer.draw(engine, performance.now());
    if (engine.state === "running") {
      status.textContent = "find the target (space replays it)";
    }
    if (engine.state !== "done") {
      requestAnimationFrame(loop);
      return;
    }
    window.removeEventListener("keydown", onKey);
    const result = engine.buildResult(participant);
    void queue.submit(result).catch(() => undefined);
    status.textContent = "task complete";
    if (task.phase === "practice") {
      app.append(
        button("Repeat practice", () => {
          driver.completeTask(true);
          void runTask(step, driver, participant, passNo);
        }),
        button("Continue", () => {
          driver.completeTask();
          void nextStep(driver, participant, passNo);
        }));
    } else {
      driver.completeTask();
      setTimeout(() => void nextStep(driver, participant, passNo), 600);
    }
  };
  requestAnimationFrame(loop);
}

void start();
