"""HTTP service exposing plans, tasks, audio, textures, and result intake."""

from __future__ import annotations

import io
import threading
import time
from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import FileResponse, PlainTextResponse, Response

from .config import StudyConfig
from .dataset import write_wav
from .errors import ConflictError, IntegrityError, ParameterError
from .pipeline import LibraryContext
from .scene import TaskResult, TaskSpec, make_task
from .store import ResultStore
from .study import (TASK_SET_CONDITIONS, make_study_plan, order_permutations,
                    parse_task_id, validate_questionnaire)


class StudyService:
    """Stateful core behind the API routes; tasks are rebuilt deterministically."""

    def __init__(self, ctx: LibraryContext, store: ResultStore, config: StudyConfig):
        self.ctx = ctx
        self.store = store
        self.config = config
        self._tasks: dict[str, TaskSpec] = {}
        self._build_lock = threading.Lock()

    def label_mode_for(self, participant_id: str, pass_no: int) -> str:
        index = self.store.register_participant(participant_id)
        orders = order_permutations(index + 1)
        order = orders[index]
        if not 1 <= pass_no <= len(order):
            raise ParameterError(f"pass must be in [1, {len(order)}]")
        return order[pass_no - 1]

    def plan(self, participant_id: str, pass_no: int):
        label_mode = self.label_mode_for(participant_id, pass_no)
        return make_study_plan(participant_id, label_mode,
                               counts=self.config.task_counts,
                               master_seed=self.config.master_seed, pass_no=pass_no)

    def task(self, task_id: str) -> TaskSpec:
        if task_id in self._tasks:
            return self._tasks[task_id]
        participant_id, pass_no, code, k = parse_task_id(task_id)
        label_mode = self.label_mode_for(participant_id, pass_no)
        placement, uses_label, phase = TASK_SET_CONDITIONS[code]
        seed = None
        plan = self.plan(participant_id, pass_no)
        for step in plan.task_steps():
            if task_id in step.task_ids:
                seed = step.task_seeds[step.task_ids.index(task_id)]
                break
        if seed is None:
            raise KeyError(task_id)
        with self._build_lock:
            if task_id not in self._tasks:
                self._tasks[task_id] = make_task(
                    self.ctx, placement, label_mode if uses_label else "baseline",
                    k, phase, seed, task_id=task_id,
                    n_samples=self.config.samples_per_task)
        return self._tasks[task_id]

    def submit_result(self, payload: dict) -> dict:
        result = TaskResult.from_dict(payload)
        try:
            task = self.task(result.task_id)
        except (KeyError, ParameterError):
            raise KeyError(result.task_id)
        validated = validate_result_record(result, task)
        record = validated.to_dict()
        record.update(placement_mode=task.scene.placement_mode,
                      label_mode=task.scene.label_mode, phase=task.phase)
        if task.phase == "practice":
            attempts = self.store.results.records(
                task_id=result.task_id, participant_id=result.participant_id)
            record["attempt"] = len(attempts)
        else:
            record["attempt"] = 0
        self.store.results.append(record)
        return {"status": "ok", "task_id": result.task_id,
                "distance": record["distance"],
                "hovered_events": record["hovered_events"]}

    def submit_questionnaire(self, payload: dict) -> dict:
        questionnaire = payload.get("questionnaire")
        participant_id = payload.get("participant_id")
        pass_no = int(payload.get("pass", 1))
        answers = validate_questionnaire(questionnaire, payload.get("answers", {}))
        record = {"questionnaire": questionnaire, "participant_id": participant_id,
                  "pass": pass_no, "answers": answers,
                  "label_mode": self.label_mode_for(participant_id, pass_no),
                  "received_at": time.time()}
        self.store.questionnaires.append(record)
        return {"status": "ok", "questionnaire": questionnaire}


def validate_result_record(result: TaskResult, task: TaskSpec) -> TaskResult:
    from .scene import validate_result
    return validate_result(result, task, received_at=time.time())


def create_app(ctx: LibraryContext, store: ResultStore,
               config: StudyConfig | None = None,
               web_dir: str | Path | None = None) -> FastAPI:
    config = config or ctx.config
    service = StudyService(ctx, store, config)
    app = FastAPI(title="timbrespace")
    app.add_middleware(CORSMiddleware, allow_origins=["*"], allow_methods=["*"],
                       allow_headers=["*"])
    app.state.service = service

    @app.get("/api/plan")
    def get_plan(participant: str, request: Request):
        pass_no = int(request.query_params.get("pass", 1))
        try:
            return service.plan(participant, pass_no).to_dict()
        except ParameterError as exc:
            raise HTTPException(status_code=400, detail=str(exc))

    @app.get("/api/task/{task_id}")
    def get_task(task_id: str):
        try:
            return service.task(task_id).to_dict()
        except (KeyError, ParameterError):
            raise HTTPException(status_code=404, detail=f"unknown task {task_id}")

    @app.get("/api/audio/{sample_id}")
    def get_audio(sample_id: str):
        try:
            sample = ctx.samples.by_id(sample_id)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown sample {sample_id}")
        path = sample.meta.source_path
        if path and Path(path).exists():
            return FileResponse(path, media_type="audio/wav")
        buf = io.BytesIO()
        write_wav(buf, sample)
        return Response(content=buf.getvalue(), media_type="audio/wav")

    @app.get("/api/texture/{sample_id}.png")
    def get_texture(sample_id: str):
        from PIL import Image

        if sample_id not in ctx.texture_labels:
            raise HTTPException(status_code=404, detail=f"unknown sample {sample_id}")
        img = ctx.texture_image(sample_id)
        buf = io.BytesIO()
        Image.fromarray((np.clip(img, 0, 1) * 255).astype(np.uint8), "L").save(
            buf, format="PNG")
        return Response(content=buf.getvalue(), media_type="image/png")

    @app.post("/api/result")
    async def post_result(request: Request):
        payload = await request.json()
        try:
            return service.submit_result(payload)
        except KeyError as exc:
            raise HTTPException(status_code=404, detail=f"unknown task {exc}")
        except IntegrityError as exc:
            raise HTTPException(status_code=422, detail={
                "error": str(exc), "reported": exc.reported,
                "recomputed": exc.recomputed})
        except ConflictError as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        except (ParameterError, TypeError, ValueError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))

    @app.post("/api/questionnaire")
    async def post_questionnaire(request: Request):
        payload = await request.json()
        try:
            return service.submit_questionnaire(payload)
        except ConflictError as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        except (ParameterError, TypeError, ValueError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))

    @app.get("/api/export")
    def export_results():
        return PlainTextResponse(store.export_results(),
                                 media_type="application/x-ndjson")

    @app.get("/api/library")
    def library_info():
        return {"n_samples": len(ctx.samples), "ids": ctx.ids,
                "canvas": {"w": config.canvas.width, "h": config.canvas.height,
                           "margin": config.canvas.margin,
                           "diameter": config.canvas.label_diameter}}

    if web_dir and Path(web_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(web_dir), html=True), name="web")
    return app


def serve(app: FastAPI, host: str = "127.0.0.1", port: int = 8000) -> None:
    import uvicorn

    uvicorn.run(app, host=host, port=port, log_level="warning")
