"""Canvas placement: pixel mapping, random baseline, spring overlap removal."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .embedding import Embedding2D
from .errors import CapacityError, ParameterError, UnresolvedOverlapError

DEFAULT_CANVAS = dict(width=800, height=800, margin=40, label_diameter=64)
SPRING_STIFFNESS = 0.5
MAX_SPRING_ITERS = 1000
# Fraction of the hexagonal packing bound treated as feasible.
CAPACITY_FILL = 0.8


@dataclass(frozen=True)
class Canvas:
    width: int = 800
    height: int = 800
    margin: int = 40
    label_diameter: int = 64

    def __post_init__(self):
        if self.width - 2 * self.margin < self.label_diameter or \
                self.height - 2 * self.margin < self.label_diameter:
            raise ParameterError("canvas too small for one label inside the margins")

    @property
    def usable(self) -> tuple[float, float, float, float]:
        """(x0, y0, x1, y1) bounds for label centers."""
        inset = self.margin + self.label_diameter / 2
        return (inset, inset, self.width - inset, self.height - inset)


@dataclass(frozen=True)
class PlacedSet:
    ids: tuple[str, ...]
    positions: np.ndarray  # (n, 2) pixel centers
    canvas: Canvas
    mode: str  # "dr" | "random"
    seed: int = 0

    def __post_init__(self):
        arr = np.asarray(self.positions, dtype=np.float64)
        arr.setflags(write=False)
        object.__setattr__(self, "positions", arr)
        if arr.shape != (len(self.ids), 2):
            raise ParameterError("positions must be (n, 2) aligned with ids")


@dataclass(frozen=True)
class OverlapReport:
    converged: bool
    iterations: int
    max_displacement: float


def _clamp(positions: np.ndarray, canvas: Canvas) -> np.ndarray:
    x0, y0, x1, y1 = canvas.usable
    out = positions.copy()
    out[:, 0] = np.clip(out[:, 0], x0, x1)
    out[:, 1] = np.clip(out[:, 1], y0, y1)
    return out


def scale_to_canvas(emb: Embedding2D, canvas: Canvas, mode: str = "dr") -> PlacedSet:
    """Uniform-scale affine fit of the embedding into the usable rectangle."""
    coords = np.asarray(emb.coords)
    if coords.shape[0] < 1:
        raise ParameterError("embedding is empty")
    x0, y0, x1, y1 = canvas.usable
    usable_w, usable_h = x1 - x0, y1 - y0
    span = coords.max(axis=0) - coords.min(axis=0)
    scales = [usable_w / span[0] if span[0] > 0 else np.inf,
              usable_h / span[1] if span[1] > 0 else np.inf]
    scale = min(scales)
    if not np.isfinite(scale):
        scale = 1.0  # single point or fully degenerate cloud
    center = (coords.max(axis=0) + coords.min(axis=0)) / 2
    target_center = np.array([(x0 + x1) / 2, (y0 + y1) / 2])
    positions = (coords - center) * scale + target_center
    return PlacedSet(ids=tuple(emb.ids), positions=positions, canvas=canvas,
                     mode=mode, seed=emb.seed)


def _capacity(n: int, canvas: Canvas) -> bool:
    x0, y0, x1, y1 = canvas.usable
    d = canvas.label_diameter
    area = (x1 - x0 + d) * (y1 - y0 + d)
    return n <= CAPACITY_FILL * area / (np.pi * d ** 2 / 4)


def random_placement(ids: list[str], canvas: Canvas, seed: int = 0,
                     max_iters: int = MAX_SPRING_ITERS) -> PlacedSet:
    """Seeded uniform placement in the usable rectangle, overlaps resolved."""
    if not ids:
        raise ParameterError("ids must be nonempty")
    if not _capacity(len(ids), canvas):
        raise CapacityError(f"cannot fit {len(ids)} labels of diameter "
                            f"{canvas.label_diameter} on {canvas.width}x{canvas.height}")
    rng = np.random.default_rng(seed)
    x0, y0, x1, y1 = canvas.usable
    positions = np.column_stack([rng.uniform(x0, x1, len(ids)),
                                 rng.uniform(y0, y1, len(ids))])
    placed = PlacedSet(ids=tuple(ids), positions=positions, canvas=canvas,
                       mode="random", seed=seed)
    placed, _ = resolve_overlaps(placed, max_iters=max_iters)
    return placed


def _tie_break_direction(id_a: str, id_b: str) -> np.ndarray:
    digest = hashlib.sha256(f"{id_a}|{id_b}".encode()).digest()
    angle = int.from_bytes(digest[:8], "big") / 2 ** 64 * 2 * np.pi
    return np.array([np.cos(angle), np.sin(angle)])


def resolve_overlaps(placed: PlacedSet,
                     max_iters: int = MAX_SPRING_ITERS) -> tuple[PlacedSet, OverlapReport]:
    """Push overlapping label pairs apart until all centers are a diameter apart.

    Each iteration accumulates, for every pair closer than the diameter, a
    displacement of stiffness * overlap / 2 on both centers along their
    difference vector, then clamps to the usable rectangle.
    """
    pos = np.asarray(placed.positions, dtype=np.float64).copy()
    d = float(placed.canvas.label_diameter)
    n = pos.shape[0]
    iu, ju = np.triu_indices(n, k=1)
    # The rest target sits a hair beyond the diameter: the pure fixed point
    # is approached from below and float rounding would otherwise stall
    # pairs at diameter - epsilon with sub-ulp position updates.
    rest = d * (1.0 + 1e-7)
    max_disp = 0.0
    iterations = 0
    residual = 0
    for iterations in range(max_iters + 1):
        delta = pos[iu] - pos[ju]
        gaps = np.hypot(delta[:, 0], delta[:, 1])
        overlapping = gaps < d
        residual = int(overlapping.sum())
        if residual == 0:
            out = PlacedSet(ids=placed.ids, positions=pos, canvas=placed.canvas,
                            mode=placed.mode, seed=placed.seed)
            return out, OverlapReport(converged=True, iterations=iterations,
                                      max_displacement=max_disp)
        if iterations == max_iters:
            break
        oi, oj = iu[overlapping], ju[overlapping]
        gap = gaps[overlapping]
        dirs = np.zeros((residual, 2))
        nonzero = gap > 0
        dirs[nonzero] = delta[overlapping][nonzero] / gap[nonzero, None]
        for k in np.flatnonzero(~nonzero):
            dirs[k] = _tie_break_direction(placed.ids[oi[k]], placed.ids[oj[k]])
        step = (SPRING_STIFFNESS * (rest - gap) / 2)[:, None] * dirs
        moves = np.zeros_like(pos)
        np.add.at(moves, oi, step)
        np.add.at(moves, oj, -step)
        pos = _clamp(pos + moves, placed.canvas)
        max_disp = max(max_disp, float(np.abs(moves).sum()))
    raise UnresolvedOverlapError(
        f"{residual} overlapping pairs remain after {max_iters} iterations", residual)
