"""Scene assembly, known-item search tasks, and result validation.

A scene is an immutable bundle of 30 placed samples with one label family,
serialized as a canonical JSON dictionary consumed by the browser UI. Tasks
wrap a scene with a designated target and a start corner that rotates
clockwise between tasks.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .errors import IntegrityError, ParameterError
from .layout import Canvas, random_placement, resolve_overlaps, scale_to_canvas
from .pipeline import LibraryContext

PLACEMENT_MODES = ("dr", "random")
LABEL_MODES = ("baseline", "shape", "color", "texture")
SAMPLES_PER_TASK = 30
PHASES = ("practice", "familiarization", "evaluation")
START_CORNERS = 4  # top-left = 0, then clockwise


@dataclass(frozen=True)
class SceneSample:
    """One placed sample in the scene JSON.

    shape_path is a closed 402-vertex polyline in unit coordinates centered
    on the sample, y pointing up: it starts at the topmost vertex, traces
    the right half downward, then the mirrored left half back up (clockwise
    winding in y-up coordinates). Renderers scale by diameter/2 and flip y.
    """

    id: str
    x: float
    y: float
    shape_path: Optional[list[list[float]]] = None
    color_hsl: Optional[list[float]] = None
    texture_ref: Optional[str] = None


@dataclass(frozen=True)
class Scene:
    scene_id: str
    canvas: Canvas
    placement_mode: str
    label_mode: str
    samples: tuple[SceneSample, ...]
    seed: int

    def to_dict(self) -> dict:
        samples = []
        for s in self.samples:
            entry = {"id": s.id, "x": s.x, "y": s.y}
            if s.shape_path is not None:
                entry["shape_path"] = s.shape_path
            if s.color_hsl is not None:
                entry["color_hsl"] = s.color_hsl
            if s.texture_ref is not None:
                entry["texture_ref"] = s.texture_ref
            samples.append(entry)
        return {
            "scene_id": self.scene_id,
            "canvas": {"w": self.canvas.width, "h": self.canvas.height,
                       "margin": self.canvas.margin, "diameter": self.canvas.label_diameter},
            "placement_mode": self.placement_mode,
            "label_mode": self.label_mode,
            "samples": samples,
            "seed": self.seed,
        }

    def to_json(self) -> str:
        return canonical_json(self.to_dict())

    @staticmethod
    def from_dict(data: dict) -> "Scene":
        c = data["canvas"]
        samples = tuple(
            SceneSample(id=s["id"], x=s["x"], y=s["y"],
                        shape_path=s.get("shape_path"), color_hsl=s.get("color_hsl"),
                        texture_ref=s.get("texture_ref"))
            for s in data["samples"])
        return Scene(scene_id=data["scene_id"],
                     canvas=Canvas(width=c["w"], height=c["h"], margin=c["margin"],
                                   label_diameter=c["diameter"]),
                     placement_mode=data["placement_mode"], label_mode=data["label_mode"],
                     samples=samples, seed=data["seed"])


@dataclass(frozen=True)
class TaskSpec:
    task_id: str
    scene: Scene
    target_id: str
    start_corner: int
    phase: str

    def __post_init__(self):
        ids = {s.id for s in self.scene.samples}
        if self.target_id not in ids:
            raise ParameterError(f"target {self.target_id} not in scene")
        if self.start_corner not in range(START_CORNERS):
            raise ParameterError("start_corner must be 0..3")
        if self.phase not in PHASES:
            raise ParameterError(f"unknown phase {self.phase!r}")

    def to_dict(self) -> dict:
        return {"task_id": self.task_id, "scene": self.scene.to_dict(),
                "target_id": self.target_id, "start_corner": self.start_corner,
                "phase": self.phase}


@dataclass(frozen=True)
class TaskResult:
    task_id: str
    participant_id: str
    completion_time: float
    hovered_events: int
    hovered_unique: int
    distance: float
    trajectory: tuple[tuple[float, float, float], ...]  # (t, x, y)
    misclicks: int
    target_replays: int
    completed: bool
    received_at: Optional[float] = None

    def to_dict(self) -> dict:
        return {"task_id": self.task_id, "participant_id": self.participant_id,
                "completion_time": self.completion_time,
                "hovered_events": self.hovered_events,
                "hovered_unique": self.hovered_unique, "distance": self.distance,
                "trajectory": [list(p) for p in self.trajectory],
                "misclicks": self.misclicks, "target_replays": self.target_replays,
                "completed": self.completed, "received_at": self.received_at}

    @staticmethod
    def from_dict(data: dict) -> "TaskResult":
        return TaskResult(
            task_id=data["task_id"], participant_id=data["participant_id"],
            completion_time=float(data["completion_time"]),
            hovered_events=int(data["hovered_events"]),
            hovered_unique=int(data["hovered_unique"]),
            distance=float(data["distance"]),
            trajectory=tuple(tuple(float(v) for v in p) for p in data["trajectory"]),
            misclicks=int(data["misclicks"]),
            target_replays=int(data["target_replays"]),
            completed=bool(data["completed"]),
            received_at=data.get("received_at"))


def canonical_json(obj) -> str:
    """Stable serialization: sorted keys, no whitespace, plain floats."""
    return json.dumps(_plain(obj), sort_keys=True, separators=(",", ":"))


def _plain(obj):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    return obj


def derive_seed(*parts) -> int:
    """Stable 63-bit seed from a list of identifying parts."""
    digest = hashlib.sha256(":".join(str(p) for p in parts).encode()).digest()
    return int.from_bytes(digest[:8], "big") >> 1


def _round6(x: float) -> float:
    return round(float(x), 6)


def build_scene(ctx: LibraryContext, ids: list[str], placement_mode: str,
                label_mode: str, seed: int, scene_id: Optional[str] = None) -> Scene:
    """Compose placement and labels for the given sample ids."""
    if placement_mode not in PLACEMENT_MODES:
        raise ParameterError(f"unknown placement mode {placement_mode!r}")
    if label_mode not in LABEL_MODES:
        raise ParameterError(f"unknown label mode {label_mode!r}")
    missing = [i for i in ids if i not in ctx.profiles]
    if missing:
        raise ParameterError(f"ids not in library: {missing[:5]}")
    canvas = ctx.config.canvas
    if placement_mode == "dr":
        index = {sid: k for k, sid in enumerate(ctx.embedding.ids)}
        rows = [index[i] for i in ids]
        sub = replace(ctx.embedding, ids=tuple(ids),
                      coords=np.asarray(ctx.embedding.coords)[rows])
        placed = scale_to_canvas(sub, canvas)
        placed, _ = resolve_overlaps(placed)
    else:
        placed = random_placement(list(ids), canvas, seed=seed)

    colors = ctx.colors() if label_mode == "color" else None
    samples = []
    for k, sid in enumerate(placed.ids):
        x, y = placed.positions[k]
        shape_path = None
        color_hsl = None
        texture_ref = None
        if label_mode == "shape":
            shape_path = ctx.shape_paths[sid]
        elif label_mode == "color":
            c = colors[sid]
            color_hsl = [_round6(c.hue), _round6(c.saturation), _round6(c.lightness)]
        elif label_mode == "texture":
            texture_ref = ctx.texture_labels[sid].image_ref
        samples.append(SceneSample(id=sid, x=_round6(x), y=_round6(y),
                                   shape_path=shape_path, color_hsl=color_hsl,
                                   texture_ref=texture_ref))
    if scene_id is None:
        scene_id = f"scene-{derive_seed(placement_mode, label_mode, seed):016x}"
    return Scene(scene_id=scene_id, canvas=canvas, placement_mode=placement_mode,
                 label_mode=label_mode, samples=tuple(samples), seed=seed)


def make_task(ctx: LibraryContext, placement_mode: str, label_mode: str, k: int,
              phase: str, seed: int, task_id: Optional[str] = None,
              n_samples: int = SAMPLES_PER_TASK) -> TaskSpec:
    """One known-item search trial: sampled scene, random target, rotating corner."""
    pool = sorted(ctx.profiles)
    if len(pool) < n_samples:
        raise ParameterError(f"library has {len(pool)} samples; task needs {n_samples}")
    rng = np.random.default_rng(seed)
    chosen = sorted(rng.choice(len(pool), size=n_samples, replace=False).tolist())
    ids = [pool[i] for i in chosen]
    target = ids[int(rng.integers(n_samples))]
    scene = build_scene(ctx, ids, placement_mode, label_mode, seed=seed)
    if task_id is None:
        task_id = f"task-{derive_seed(placement_mode, label_mode, k, seed):016x}"
    return TaskSpec(task_id=task_id, scene=scene, target_id=target,
                    start_corner=k % START_CORNERS, phase=phase)


def recompute_measures(trajectory, scene: Scene) -> tuple[float, int, int]:
    """Distance and hover counts implied by a trajectory over a scene.

    A hover event is the cursor entering a label's hit disc (radius =
    diameter / 2) after being outside it; the first trajectory point counts
    as an entry for discs it starts inside.
    """
    points = np.asarray([(p[1], p[2]) for p in trajectory], dtype=np.float64)
    if len(points) == 0:
        return 0.0, 0, 0
    distance = float(np.sum(np.hypot(*np.diff(points, axis=0).T))) if len(points) > 1 else 0.0
    centers = np.asarray([(s.x, s.y) for s in scene.samples])
    radius = scene.canvas.label_diameter / 2
    inside = np.hypot(points[:, 0, None] - centers[None, :, 0],
                      points[:, 1, None] - centers[None, :, 1]) <= radius
    entries = inside & ~np.vstack([np.zeros((1, len(centers)), dtype=bool), inside[:-1]])
    events = int(entries.sum())
    unique = int(np.any(entries, axis=0).sum())
    return distance, events, unique


def validate_result(result: TaskResult, task: TaskSpec,
                    received_at: Optional[float] = None) -> TaskResult:
    """Recompute distance and hover counts; reject inconsistent submissions."""
    if result.task_id != task.task_id:
        raise IntegrityError(f"result task {result.task_id} != task {task.task_id}")
    if result.completed and result.completion_time <= 0:
        raise IntegrityError("completed result must have positive completion_time")
    distance, events, unique = recompute_measures(result.trajectory, task.scene)
    tolerance = max(distance, 1e-9) * 0.01
    if abs(result.distance - distance) > tolerance:
        raise IntegrityError("client distance deviates more than 1% from recomputation",
                             reported=result.distance, recomputed=distance)
    return replace(result, distance=distance, hovered_events=events,
                   hovered_unique=unique, received_at=received_at)
