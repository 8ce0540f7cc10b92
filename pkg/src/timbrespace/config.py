"""Study and engine configuration, loadable from a TOML file."""

from __future__ import annotations

import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ParameterError
from .layout import Canvas

MIN_TASKS_PER_SET = 5
MAX_TASKS_PER_SET = 10


@dataclass(frozen=True)
class TaskCounts:
    b_r: int = 7
    b_dr: int = 7
    l_dr: int = 7
    l_r: int = 7

    def __post_init__(self):
        for name in ("b_r", "b_dr", "l_dr", "l_r"):
            v = getattr(self, name)
            if not MIN_TASKS_PER_SET <= v <= MAX_TASKS_PER_SET:
                raise ParameterError(
                    f"task count {name}={v} outside [{MIN_TASKS_PER_SET}, {MAX_TASKS_PER_SET}]")

    def as_dict(self) -> dict[str, int]:
        return {"b_r": self.b_r, "b_dr": self.b_dr, "l_dr": self.l_dr, "l_r": self.l_r}


@dataclass(frozen=True)
class StudyConfig:
    canvas: Canvas = field(default_factory=Canvas)
    task_counts: TaskCounts = field(default_factory=TaskCounts)
    master_seed: int = 1234
    samples_per_task: int = 30

    n_channels: int = 42
    fmin: float = 26.0
    fmax: float = 7800.0
    sample_rate: int = 16_000
    frame_rate: float = 200.0

    pca_dim: int = 10
    n_neighbors: int = 15
    min_dist: float = 0.1
    n_epochs: int = 500
    embed_seed: int = 42

    color_scheme: str = "wheel-v1"       # or "descriptor-v2"
    hue_start: float = 240.0             # blue end of the descriptor gradient
    hue_path: str = "green"              # gradient direction: green | magenta
    saturation_mode: str = "inverted"    # tonal = saturated; or "direct"
    texture_size: int = 256
    exemplar_dir: str | None = None
    exemplar_seed: int = 7

    pitch: int | None = None
    velocity: int | None = None

    def __post_init__(self):
        if self.color_scheme not in ("wheel-v1", "descriptor-v2"):
            raise ParameterError(f"unknown color scheme {self.color_scheme!r}")


def load_config(path: str | Path) -> StudyConfig:
    """Read a study TOML file; unspecified keys keep their defaults."""
    with open(path, "rb") as fh:
        raw = tomllib.load(fh)
    cfg = StudyConfig()
    if "canvas" in raw:
        c = raw["canvas"]
        cfg = replace(cfg, canvas=Canvas(
            width=c.get("width", 800), height=c.get("height", 800),
            margin=c.get("margin", 40), label_diameter=c.get("diameter", 64)))
    if "study" in raw:
        s = raw["study"]
        counts = s.get("task_counts", {})
        cfg = replace(
            cfg,
            task_counts=TaskCounts(**{k: counts.get(k, 7) for k in ("b_r", "b_dr", "l_dr", "l_r")}),
            master_seed=s.get("master_seed", cfg.master_seed),
            samples_per_task=s.get("samples_per_task", cfg.samples_per_task))
    if "filterbank" in raw:
        f = raw["filterbank"]
        cfg = replace(cfg, n_channels=f.get("channels", cfg.n_channels),
                      fmin=f.get("fmin", cfg.fmin), fmax=f.get("fmax", cfg.fmax),
                      sample_rate=f.get("sample_rate", cfg.sample_rate),
                      frame_rate=f.get("frame_rate", cfg.frame_rate))
    if "embedding" in raw:
        e = raw["embedding"]
        cfg = replace(cfg, pca_dim=e.get("pca_dim", cfg.pca_dim),
                      n_neighbors=e.get("neighbors", cfg.n_neighbors),
                      min_dist=e.get("min_dist", cfg.min_dist),
                      n_epochs=e.get("epochs", cfg.n_epochs),
                      embed_seed=e.get("seed", cfg.embed_seed))
    if "labels" in raw:
        lb = raw["labels"]
        cfg = replace(cfg, color_scheme=lb.get("color_scheme", cfg.color_scheme),
                      hue_start=lb.get("hue_start", cfg.hue_start),
                      hue_path=lb.get("hue_path", cfg.hue_path),
                      saturation_mode=lb.get("saturation_mode", cfg.saturation_mode),
                      texture_size=lb.get("texture_size", cfg.texture_size),
                      exemplar_dir=lb.get("exemplar_dir", cfg.exemplar_dir),
                      exemplar_seed=lb.get("exemplar_seed", cfg.exemplar_seed))
    if "library" in raw:
        lib = raw["library"]
        cfg = replace(cfg, pitch=lib.get("pitch", cfg.pitch),
                      velocity=lib.get("velocity", cfg.velocity))
    return cfg
