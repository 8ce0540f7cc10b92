"""Visual label generation: envelope shapes, colors, and grayscale textures.

Shapes map the 201-point temporal envelope to the radius of a half contour
mirrored across the vertical axis. Colors come either from a color wheel
laid over the placed distribution (scheme ``wheel-v1``) or from the
centroid/flatness descriptors (scheme ``descriptor-v2``). Textures blend
eight exemplar images assigned to timbre-space medoids: magnitude spectra
are combined as a weighted geometric mean, phase is randomized, and the
result is histogram-shaped toward the blended exemplar distribution before
the target spectrum is re-imposed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cochlea import TimbreDescriptors
from .embedding import FeatureVector, feature_matrix
from .errors import ParameterError

SHAPE_POINTS = 201  # half-contour vertices, angle index 0..200
MIN_SHAPE_RADIUS = 0.15
N_MEDOIDS = 8
TEXTURE_SIZE = 256
WEIGHT_EPSILON = 1e-9


@dataclass(frozen=True)
class ShapeLabel:
    radii: np.ndarray     # (201,) envelope-driven radii in [r_min, 1]
    polygon: np.ndarray   # (402, 2) closed contour, unit coords, centered

    def __post_init__(self):
        for name in ("radii", "polygon"):
            arr = np.asarray(getattr(self, name), dtype=np.float64)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)


@dataclass(frozen=True)
class ColorLabel:
    hue: float         # degrees in [0, 360)
    saturation: float  # [0, 1]
    lightness: float   # fixed 0.5
    scheme: str        # "wheel-v1" | "descriptor-v2"


@dataclass(frozen=True)
class TextureLabel:
    medoid_weights: np.ndarray  # (8,) nonnegative, sums to 1
    image_ref: str

    def __post_init__(self):
        arr = np.asarray(self.medoid_weights, dtype=np.float64)
        arr.setflags(write=False)
        object.__setattr__(self, "medoid_weights", arr)
        if arr.shape != (N_MEDOIDS,) or abs(arr.sum() - 1.0) > 1e-9:
            raise ParameterError("medoid weights must be 8 values summing to 1")


@dataclass(frozen=True)
class ExemplarTexture:
    id: str
    pixels: np.ndarray  # square grayscale, power-of-two side, values in [0, 1]

    def __post_init__(self):
        arr = np.asarray(self.pixels, dtype=np.float64)
        arr.setflags(write=False)
        object.__setattr__(self, "pixels", arr)
        side = arr.shape[0]
        if arr.ndim != 2 or arr.shape[1] != side or side & (side - 1):
            raise ParameterError("exemplar must be a square power-of-two image")


def shape_label(envelope201: np.ndarray, r_min: float = MIN_SHAPE_RADIUS) -> ShapeLabel:
    """Envelope-contour glyph: right half at angles i*pi/200 from the upward
    vertical, mirrored exactly across the vertical axis; 402 vertices."""
    env = np.asarray(envelope201, dtype=np.float64)
    if env.shape != (SHAPE_POINTS,):
        raise ParameterError(f"envelope must have {SHAPE_POINTS} values, got {env.shape}")
    radii = np.maximum(env, r_min)
    theta = np.arange(SHAPE_POINTS) * np.pi / (SHAPE_POINTS - 1)
    right = np.column_stack([radii * np.sin(theta), radii * np.cos(theta)])
    left = right[::-1].copy()
    left[:, 0] = -left[:, 0]
    return ShapeLabel(radii=radii, polygon=np.vstack([right, left]))


def color_wheel(position: tuple[float, float], center: tuple[float, float],
                max_radius: float) -> ColorLabel:
    """Hue from the angle about the distribution center, saturation from distance."""
    if max_radius <= 0:
        raise ParameterError("max_radius must be positive")
    dx = position[0] - center[0]
    dy = position[1] - center[1]
    dist = float(np.hypot(dx, dy))
    hue = 0.0 if dist == 0 else float(np.degrees(np.arctan2(dy, dx))) % 360.0
    return ColorLabel(hue=hue, saturation=min(dist / max_radius, 1.0),
                      lightness=0.5, scheme="wheel-v1")


def wheel_calibration(positions: np.ndarray) -> tuple[tuple[float, float], float]:
    """Centroid and max centroid-distance of a placed set, for color_wheel."""
    pos = np.asarray(positions, dtype=np.float64)
    center = pos.mean(axis=0)
    max_radius = float(np.max(np.hypot(pos[:, 0] - center[0], pos[:, 1] - center[1])))
    return (float(center[0]), float(center[1])), max(max_radius, 1e-9)


def color_descriptor(desc: TimbreDescriptors, calib: tuple[float, float],
                     hue_start: float = 240.0, hue_path: str = "green",
                     saturation_mode: str = "inverted") -> ColorLabel:
    """Centroid mapped on a blue-to-red hue gradient; saturation from flatness.

    The gradient's traversal direction and the flatness-to-saturation
    direction are both stylistic choices, so they stay configurable:
    hue_path "green" sweeps 240 -> 0 through green, "magenta" sweeps
    240 -> 360 the other way; saturation_mode "inverted" makes tonal sounds
    saturated (1 - flatness), "direct" uses flatness as-is.
    """
    lo, hi = calib
    if not lo < hi:
        raise ParameterError("calibration needs min centroid < max centroid")
    if hue_path not in ("green", "magenta"):
        raise ParameterError(f"unknown hue path {hue_path!r}")
    if saturation_mode not in ("inverted", "direct"):
        raise ParameterError(f"unknown saturation mode {saturation_mode!r}")
    t = min(max((desc.spectral_centroid - lo) / (hi - lo), 0.0), 1.0)
    if hue_path == "green":
        hue = hue_start - hue_start * t
    else:
        hue = hue_start + (360.0 - hue_start) * t
    flatness = min(max(desc.spectral_flatness, 0.0), 1.0)
    saturation = 1.0 - flatness if saturation_mode == "inverted" else flatness
    return ColorLabel(hue=hue % 360.0, saturation=saturation,
                      lightness=0.5, scheme="descriptor-v2")


def kmedoids(vectors: list[FeatureVector], k: int, seed: int = 0,
             max_iters: int = 100) -> list[str]:
    """PAM clustering: seeded k-means++-style init, then best-swap descent.

    Returns the k medoid ids sorted lexicographically for stable downstream
    exemplar assignment.
    """
    ids, x = feature_matrix(vectors)
    n = x.shape[0]
    if not 1 <= k < n:
        raise ParameterError(f"need 1 <= k < n, got k={k}, n={n}")
    sq = np.sum(x ** 2, axis=1)
    dist = np.sqrt(np.maximum(sq[:, None] + sq[None, :] - 2 * (x @ x.T), 0.0))
    np.fill_diagonal(dist, 0.0)

    rng = np.random.default_rng(seed)
    medoids = [int(rng.integers(n))]
    while len(medoids) < k:
        d2 = np.min(dist[:, medoids], axis=1) ** 2
        total = d2.sum()
        if total <= 0:
            remaining = [i for i in range(n) if i not in medoids]
            medoids.append(remaining[int(rng.integers(len(remaining)))])
            continue
        medoids.append(int(rng.choice(n, p=d2 / total)))

    def cost(meds):
        return float(np.min(dist[:, meds], axis=1).sum())

    current = cost(medoids)
    for _ in range(max_iters):
        best_cost, best_swap = current, None
        med_set = set(medoids)
        for mi, m in enumerate(medoids):
            for o in range(n):
                if o in med_set:
                    continue
                trial = medoids.copy()
                trial[mi] = o
                c = cost(trial)
                if c < best_cost - 1e-12:
                    best_cost, best_swap = c, (mi, o)
        if best_swap is None:
            break
        medoids[best_swap[0]] = best_swap[1]
        current = best_cost
    return sorted(ids[m] for m in medoids)


def texture_weights(vector: FeatureVector,
                    medoid_vectors: list[FeatureVector]) -> np.ndarray:
    """Inverse-distance-squared interpolation weights over the 8 medoids."""
    if len(medoid_vectors) != N_MEDOIDS:
        raise ParameterError(f"need exactly {N_MEDOIDS} medoid vectors")
    dists = np.array([np.linalg.norm(vector.values - m.values) for m in medoid_vectors])
    inv = (dists + WEIGHT_EPSILON) ** -2
    return inv / inv.sum()


def _blended_quantiles(weights: np.ndarray, exemplars: list[ExemplarTexture]) -> np.ndarray:
    return sum(w * np.sort(ex.pixels.ravel()) for w, ex in zip(weights, exemplars))


def synth_texture(weights: np.ndarray, exemplars: list[ExemplarTexture],
                  size: int = TEXTURE_SIZE, seed: int = 0) -> np.ndarray:
    """Blend exemplars in the spectral domain; returns a [0, 1] grayscale image.

    The magnitude spectrum of the output equals the weighted geometric mean of
    the exemplar spectra (up to the final affine range normalization); a
    histogram-shaping pass toward the blended exemplar distribution sets the
    phase structure before that spectrum is re-imposed.
    """
    weights = np.asarray(weights, dtype=np.float64)
    if len(exemplars) != N_MEDOIDS or weights.shape != (N_MEDOIDS,):
        raise ParameterError(f"need {N_MEDOIDS} exemplars and weights")
    if size & (size - 1) or size < 2:
        raise ParameterError("size must be a power of two")
    if any(ex.pixels.shape != (size, size) for ex in exemplars):
        raise ParameterError("exemplar sizes must match the requested size")

    log_mag = sum(w * np.log(np.abs(np.fft.fft2(ex.pixels)) + 1e-12)
                  for w, ex in zip(weights, exemplars))
    target_mag = np.exp(log_mag)

    rng = np.random.default_rng(seed)
    phase = np.exp(2j * np.pi * rng.random((size, size)))
    spectrum = np.fft.fft2(np.real(np.fft.ifft2(phase)))  # Hermitian-symmetric phase
    unit = spectrum / np.maximum(np.abs(spectrum), 1e-300)
    draft = np.real(np.fft.ifft2(target_mag * unit))

    reference = _blended_quantiles(weights, exemplars)
    order = np.argsort(draft.ravel(), kind="stable")
    matched = np.empty(size * size)
    matched[order] = reference
    matched = matched.reshape(size, size)

    shaped_spectrum = np.fft.fft2(matched)
    shaped_unit = shaped_spectrum / np.maximum(np.abs(shaped_spectrum), 1e-300)
    out = np.real(np.fft.ifft2(target_mag * shaped_unit))

    lo, hi = out.min(), out.max()
    if hi > lo:
        out = (out - lo) / (hi - lo)
    else:
        out = np.zeros_like(out)
    return out


def builtin_exemplars(size: int = TEXTURE_SIZE, seed: int = 0) -> list[ExemplarTexture]:
    """Eight procedurally distinct grayscale textures (stand-ins for a photo set)."""
    if size & (size - 1) or size < 64:
        raise ParameterError("size must be a power of two, at least 64")
    rng = np.random.default_rng(seed)
    yy, xx = np.meshgrid(np.arange(size), np.arange(size), indexing="ij")
    period = size / 8

    def norm01(img):
        lo, hi = img.min(), img.max()
        return (img - lo) / (hi - lo) if hi > lo else np.zeros_like(img)

    def smooth_noise(sigma_bins):
        spec = np.fft.fft2(rng.standard_normal((size, size)))
        fy = np.fft.fftfreq(size)[:, None]
        fx = np.fft.fftfreq(size)[None, :]
        spec *= np.exp(-(fy ** 2 + fx ** 2) / (2 * (sigma_bins / size) ** 2))
        return norm01(np.real(np.fft.ifft2(spec)))

    textures = {
        "stripes-h": norm01(np.sin(2 * np.pi * yy / period)),
        "stripes-v": norm01(np.sin(2 * np.pi * xx / period)),
        "checker": norm01(np.sign(np.sin(2 * np.pi * yy / period))
                          * np.sign(np.sin(2 * np.pi * xx / period))),
        "noise-fine": norm01(rng.random((size, size))),
        "blobs-coarse": smooth_noise(size / 32),
        "rings": norm01(np.sin(2 * np.pi * np.hypot(yy - size / 2, xx - size / 2) / period)),
        "weave-diagonal": norm01(np.sin(2 * np.pi * (xx + yy) / period)
                                 + 0.5 * np.sin(2 * np.pi * (xx - yy) / (2 * period))),
        "dots": norm01(np.maximum(np.sin(2 * np.pi * yy / period), 0)
                       * np.maximum(np.sin(2 * np.pi * xx / period), 0)),
    }
    return [ExemplarTexture(id=name, pixels=img) for name, img in textures.items()]
