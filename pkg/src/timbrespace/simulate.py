"""Scripted task simulation: a nearest-unvisited-neighbor search agent.

The agent arms at the task's start corner, repeatedly moves to the closest
label it has not yet auditioned, and clicks when it reaches the target. Its
logs go through the same validation path as real submissions, so simulated
studies exercise the full result pipeline and feed the analysis exactly like
participant data.
"""

from __future__ import annotations

import numpy as np

from .config import StudyConfig
from .dataset import SampleSet, SynthSpec, synth_sample
from .layout import Canvas
from .pipeline import LibraryContext, build_library_context
from .scene import TaskResult, TaskSpec, make_task, recompute_measures, validate_result

CURSOR_SPEED = 1200.0   # px/s
SAMPLE_STEP = 12.0      # px between logged cursor positions
HOVER_DWELL = 0.35      # s spent auditioning a sample


def corner_position(canvas: Canvas, corner: int, inset: float = 24.0) -> tuple[float, float]:
    """Center of the 48x48 px arming zone; corner 0 = top-left, clockwise."""
    xs = (inset, canvas.width - inset, canvas.width - inset, inset)
    ys = (inset, inset, canvas.height - inset, canvas.height - inset)
    return xs[corner], ys[corner]


def demo_library(n: int = 48, sample_rate: int = 16_000, duration: float = 1.0,
                 seed: int = 0) -> SampleSet:
    """Synthetic sample library spanning fundamentals, rolloffs, attacks, and AM."""
    rng = np.random.default_rng(seed)
    samples = []
    fundamentals = np.geomspace(110.0, 1760.0, 8)
    for k in range(n):
        f0 = float(fundamentals[k % len(fundamentals)])
        n_harm = int(min(1 + (k * 7) % 12, max(1, int(sample_rate / 2 / f0))))
        spec = SynthSpec(
            fundamental=f0, n_harmonics=n_harm,
            harmonic_rolloff=float(rng.uniform(0.0, 2.0)),
            attack=float(rng.uniform(0.002, 0.25 * duration)),
            decay=float(rng.uniform(0.1 * duration, 0.7 * duration)),
            am_rate=float(rng.choice([0.0, 30.0, 70.0, 120.0])),
            am_depth=float(rng.uniform(0.0, 1.0)),
            noise_mix=float(rng.uniform(0.0, 0.4)),
            duration=duration, seed=int(rng.integers(2 ** 31)))
        samples.append(synth_sample(spec, sample_rate, sample_id=f"demo-{k:03d}"))
    return SampleSet(samples=tuple(samples))


def _segment(points: list, t: float, start, end, speed: float) -> float:
    """Append interpolated cursor positions from start to end; returns new time."""
    start = np.asarray(start, dtype=np.float64)
    end = np.asarray(end, dtype=np.float64)
    length = float(np.hypot(*(end - start)))
    steps = max(1, int(length / SAMPLE_STEP))
    for i in range(1, steps + 1):
        pos = start + (end - start) * (i / steps)
        t += length / steps / speed
        points.append((t, float(pos[0]), float(pos[1])))
    return t


def run_agent(task: TaskSpec, participant_id: str, rng: np.random.Generator,
              time_factor: float = 1.0) -> TaskResult:
    """Simulate one trial; the returned result passes server validation."""
    scene = task.scene
    centers = {s.id: (s.x, s.y) for s in scene.samples}
    pos = corner_position(scene.canvas, task.start_corner)
    t = 0.0
    points = [(t, pos[0], pos[1])]
    unvisited = set(centers)
    current = pos
    dwell_total = 0.0
    while unvisited:
        nearest = min(unvisited,
                      key=lambda sid: np.hypot(centers[sid][0] - current[0],
                                               centers[sid][1] - current[1]))
        t = _segment(points, t, current, centers[nearest], CURSOR_SPEED)
        current = centers[nearest]
        dwell = HOVER_DWELL * float(rng.uniform(0.8, 1.2))
        dwell_total += dwell
        t += dwell
        points.append((t, current[0], current[1]))
        unvisited.discard(nearest)
        if nearest == task.target_id:
            break
    distance, events, unique = recompute_measures(points, scene)
    noise = float(np.exp(rng.normal(0.0, 0.12)))
    completion = (t + 0.2) * time_factor * noise
    return TaskResult(task_id=task.task_id, participant_id=participant_id,
                      completion_time=completion, hovered_events=events,
                      hovered_unique=unique, distance=distance,
                      trajectory=tuple(points), misclicks=0,
                      target_replays=int(rng.integers(0, 3)), completed=True)


def simulate_results(ctx: LibraryContext, participants: list[str],
                     conditions: list[tuple[str, str]], tasks_per_condition: int,
                     seed: int = 0,
                     time_effects: dict[tuple[str, str], float] | None = None) -> list[dict]:
    """Simulated, validated result records across participants and conditions."""
    time_effects = time_effects or {}
    rng = np.random.default_rng(seed)
    records = []
    k = 0
    for participant in participants:
        skill = float(np.exp(rng.normal(0.0, 0.05)))
        for placement, label in conditions:
            for _ in range(tasks_per_condition):
                task_seed = int(rng.integers(2 ** 31))
                task = make_task(ctx, placement, label, k, "evaluation", task_seed,
                                 task_id=f"{participant}:sim:{placement}:{label}:{k}")
                factor = skill * time_effects.get((placement, label), 1.0)
                result = run_agent(task, participant, rng, time_factor=factor)
                validated = validate_result(result, task, received_at=float(k))
                record = validated.to_dict()
                record.update(placement_mode=placement, label_mode=label,
                              phase="evaluation")
                records.append(record)
                k += 1
    return records


def build_demo_context(n_samples: int = 48, seed: int = 0,
                       config: StudyConfig | None = None) -> LibraryContext:
    config = config or StudyConfig(n_epochs=200)
    library = demo_library(n=n_samples, sample_rate=config.sample_rate, seed=seed)
    return build_library_context(library, config)
