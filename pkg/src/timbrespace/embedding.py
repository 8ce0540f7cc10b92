"""2D sample placement from timbre profiles.

Each of the three profiles is PCA-reduced, the blocks are standardized and
concatenated, and the concatenated vectors are embedded in 2D with a
seeded neighbor-embedding optimizer (exact k-NN graph, per-point kernel
calibration, fuzzy-union symmetrization, SGD over the cross-entropy
objective with negative sampling). Trustworthiness quantifies how well the
2D neighborhoods reflect the high-dimensional ones.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import curve_fit

from .cochlea import TimbreProfile, resample_envelope
from .errors import ParameterError, ZeroVarianceError

DEFAULT_PCA_DIM = 10
DEFAULT_NEIGHBORS = 15
DEFAULT_MIN_DIST = 0.1
DEFAULT_EPOCHS = 500
NEGATIVE_SAMPLES = 5
ENVELOPE_POINTS = 200
_GRAD_CLIP = 4.0


@dataclass(frozen=True)
class PcaModel:
    mean: np.ndarray
    components: np.ndarray  # (d_pca, dim), orthonormal rows
    explained_variance: np.ndarray

    def __post_init__(self):
        for name in ("mean", "components", "explained_variance"):
            arr = np.asarray(getattr(self, name), dtype=np.float64)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)


@dataclass(frozen=True)
class FeatureVector:
    source_id: str
    values: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float64)
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)
        if not np.all(np.isfinite(arr)):
            raise ParameterError(f"non-finite feature values for {self.source_id}")


@dataclass(frozen=True)
class Embedding2D:
    ids: tuple[str, ...]
    coords: np.ndarray  # (n, 2)
    seed: int
    n_neighbors: int
    min_dist: float
    n_epochs: int

    def __post_init__(self):
        arr = np.asarray(self.coords, dtype=np.float64)
        arr.setflags(write=False)
        object.__setattr__(self, "coords", arr)


def pca_fit(vectors: np.ndarray, d_pca: int) -> PcaModel:
    """Top-d_pca principal components of mean-centered data, via SVD."""
    x = np.asarray(vectors, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 2:
        raise ParameterError("need at least 2 vectors")
    n, dim = x.shape
    if d_pca < 1 or d_pca > min(n - 1, dim):
        raise ParameterError(f"d_pca {d_pca} exceeds min(n-1, dim) = {min(n - 1, dim)}")
    mean = x.mean(axis=0)
    centered = x - mean
    _, s, vt = np.linalg.svd(centered, full_matrices=False)
    variance = s ** 2 / (n - 1)
    if variance[0] <= 1e-24:
        raise ZeroVarianceError("all input vectors are identical")
    return PcaModel(mean=mean, components=vt[:d_pca],
                    explained_variance=variance[:d_pca])


def pca_transform(model: PcaModel, vectors: np.ndarray) -> np.ndarray:
    x = np.asarray(vectors, dtype=np.float64)
    single = x.ndim == 1
    if single:
        x = x[None, :]
    if x.shape[1] != model.mean.shape[0]:
        raise ParameterError(
            f"vector length {x.shape[1]} != model dimension {model.mean.shape[0]}")
    out = (x - model.mean) @ model.components.T
    return out[0] if single else out


def pca_inverse(model: PcaModel, coords: np.ndarray) -> np.ndarray:
    coords = np.asarray(coords, dtype=np.float64)
    single = coords.ndim == 1
    if single:
        coords = coords[None, :]
    out = coords @ model.components + model.mean
    return out[0] if single else out


def profile_matrix(profiles: dict[str, TimbreProfile],
                   n_points: int = ENVELOPE_POINTS) -> tuple[list[str], dict[str, np.ndarray]]:
    """Flatten profiles into per-kind matrices aligned over sorted sample ids."""
    ids = sorted(profiles)
    if not ids:
        raise ParameterError("no profiles given")
    spec_len = {len(profiles[i].spectral_envelope) for i in ids}
    if len(spec_len) != 1:
        raise ParameterError("inconsistent spectral envelope lengths")
    blocks = {"spectral": [], "roughness": [], "temporal": []}
    for i in ids:
        p = profiles[i]
        duration = max(len(p.temporal_envelope), 1) / p.frame_rate
        blocks["spectral"].append(p.spectral_envelope)
        blocks["roughness"].append(resample_envelope(p.roughness_envelope, duration, n_points))
        blocks["temporal"].append(resample_envelope(p.temporal_envelope, duration, n_points))
    return ids, {k: np.asarray(v) for k, v in blocks.items()}


def concat_features(profiles: dict[str, TimbreProfile],
                    d_pca: int = DEFAULT_PCA_DIM) -> list[FeatureVector]:
    """PCA-reduce each profile kind, standardize blocks, and concatenate.

    Block order is fixed (spectral, roughness, temporal); each block is
    scaled to unit total variance so no profile dominates by raw scale.
    """
    ids, blocks = profile_matrix(profiles)
    parts = []
    for kind in ("spectral", "roughness", "temporal"):
        model = pca_fit(blocks[kind], d_pca)
        coords = pca_transform(model, blocks[kind])
        total_var = coords.var(axis=0, ddof=1).sum()
        parts.append(coords / np.sqrt(total_var))
    stacked = np.hstack(parts)
    return [FeatureVector(source_id=i, values=stacked[k]) for k, i in enumerate(ids)]


def feature_matrix(vectors: list[FeatureVector]) -> tuple[list[str], np.ndarray]:
    lengths = {len(v.values) for v in vectors}
    if len(lengths) > 1:
        raise ParameterError("feature vectors have inconsistent lengths")
    return [v.source_id for v in vectors], np.asarray([v.values for v in vectors])


def _pairwise_distances(x: np.ndarray) -> np.ndarray:
    sq = np.sum(x ** 2, axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (x @ x.T)
    np.fill_diagonal(d2, 0.0)
    return np.sqrt(np.maximum(d2, 0.0))


def _calibrate_scale(dists: np.ndarray, rho: float, target: float,
                     n_iter: int = 64, tol: float = 1e-5) -> float:
    """Binary-search the kernel width so the smoothed neighbor count hits target."""
    lo, hi, mid = 0.0, np.inf, 1.0
    shifted = np.maximum(dists - rho, 0.0)
    for _ in range(n_iter):
        val = np.exp(-shifted / mid).sum()
        if abs(val - target) < tol:
            break
        if val > target:
            hi = mid
            mid = (lo + hi) / 2.0
        else:
            lo = mid
            mid = mid * 2.0 if hi == np.inf else (lo + hi) / 2.0
    return mid


@lru_cache(maxsize=8)
def _fit_kernel_params(min_dist: float, spread: float = 1.0) -> tuple[float, float]:
    """Least-squares fit of 1/(1 + a d^(2b)) to the target membership curve."""

    def curve(x, a, b):
        return 1.0 / (1.0 + a * x ** (2 * b))

    xv = np.linspace(0, spread * 3, 300)
    yv = np.where(xv < min_dist, 1.0, np.exp(-(xv - min_dist) / spread))
    params, _ = curve_fit(curve, xv, yv)
    return float(params[0]), float(params[1])


def _knn_graph(x: np.ndarray, n_neighbors: int):
    n = x.shape[0]
    dmat = _pairwise_distances(x)
    order = np.argsort(dmat, axis=1, kind="stable")
    knn_idx = np.empty((n, n_neighbors), dtype=np.int64)
    knn_dist = np.empty((n, n_neighbors))
    for i in range(n):
        row = order[i][order[i] != i][:n_neighbors]
        knn_idx[i] = row
        knn_dist[i] = dmat[i, row]
    return knn_idx, knn_dist


def _fuzzy_weights(knn_idx: np.ndarray, knn_dist: np.ndarray, n_neighbors: int):
    n = knn_idx.shape[0]
    target = np.log2(n_neighbors)
    directed = {}
    for i in range(n):
        rho = knn_dist[i, 0]
        sigma = _calibrate_scale(knn_dist[i], rho, target)
        w = np.exp(-np.maximum(knn_dist[i] - rho, 0.0) / sigma)
        for j, wij in zip(knn_idx[i], w):
            directed[(i, int(j))] = wij
    merged = {}
    for (i, j), w in directed.items():
        key = (min(i, j), max(i, j))
        if key in merged:
            a = merged[key]
            merged[key] = a + w - a * w
        else:
            merged[key] = w
    pairs = sorted(merged)
    heads = np.array([p[0] for p in pairs], dtype=np.int64)
    tails = np.array([p[1] for p in pairs], dtype=np.int64)
    weights = np.array([merged[p] for p in pairs])
    return heads, tails, weights


def _pca_init(x: np.ndarray, seed: int) -> np.ndarray:
    # Anchoring on the first row makes the init exactly translation-invariant
    # whenever the inputs shift without rounding; centering removes it anyway.
    x = x - x[0]
    model = pca_fit(x, min(2, min(x.shape[0] - 1, x.shape[1])))
    coords = pca_transform(model, x)
    if coords.ndim == 1 or coords.shape[1] == 1:
        coords = np.column_stack([np.atleast_2d(coords).reshape(-1),
                                  np.zeros(x.shape[0])])
    top = np.abs(coords).max()
    if top > 0:
        coords = coords * (10.0 / top)
    # Tiny seeded jitter breaks exact ties between duplicate points.
    coords = coords + np.random.default_rng(seed).normal(0.0, 1e-4, coords.shape)
    return coords.astype(np.float64)


def embed(vectors: list[FeatureVector], n_neighbors: int = DEFAULT_NEIGHBORS,
          min_dist: float = DEFAULT_MIN_DIST, n_epochs: int = DEFAULT_EPOCHS,
          seed: int = 0) -> Embedding2D:
    """Seeded 2D neighbor embedding of the feature vectors.

    Deterministic per (vectors, params, seed): exact k-NN, binary-search
    kernel calibration, fuzzy-union edge weights, PCA initialization scaled
    to [-10, 10], then SGD with per-edge sampling rates, 5 negative samples
    per edge side, and a linearly annealed learning rate.
    """
    ids, x = feature_matrix(vectors)
    n = x.shape[0]
    if n_neighbors < 2:
        raise ParameterError("n_neighbors must be at least 2")
    if n < n_neighbors + 1:
        raise ParameterError(f"need at least n_neighbors + 1 = {n_neighbors + 1} points, got {n}")
    if n_epochs < 1:
        raise ParameterError("n_epochs must be positive")

    knn_idx, knn_dist = _knn_graph(x, n_neighbors)
    heads, tails, weights = _fuzzy_weights(knn_idx, knn_dist, n_neighbors)
    a, b = _fit_kernel_params(min_dist)

    max_w = weights.max()
    keep = weights >= max_w / n_epochs
    heads, tails, weights = heads[keep], tails[keep], weights[keep]
    epochs_per_sample = max_w / weights

    emb = _pca_init(x, seed)
    rng = np.random.default_rng(seed)
    next_fire = epochs_per_sample.copy()

    for epoch in range(n_epochs):
        alpha = 1.0 - epoch / n_epochs
        fired = next_fire <= epoch + 1.0
        if np.any(fired):
            h, t = heads[fired], tails[fired]
            diff = emb[h] - emb[t]
            d2 = np.sum(diff ** 2, axis=1)
            coef = np.where(d2 > 0.0,
                            -2.0 * a * b * d2 ** (b - 1.0) / (a * d2 ** b + 1.0), 0.0)
            grad = np.clip(coef[:, None] * diff, -_GRAD_CLIP, _GRAD_CLIP) * alpha
            np.add.at(emb, h, grad)
            np.add.at(emb, t, -grad)

            sources = np.concatenate([h, t])
            rep = np.repeat(sources, NEGATIVE_SAMPLES)
            targets = rng.integers(0, n, size=rep.shape[0])
            diff = emb[rep] - emb[targets]
            d2 = np.sum(diff ** 2, axis=1)
            coef = 2.0 * b / ((0.001 + d2) * (a * np.where(d2 > 0, d2, 1.0) ** b + 1.0))
            grad = np.clip(coef[:, None] * diff, -_GRAD_CLIP, _GRAD_CLIP)
            # Coincident pairs get the reference push; self-pairs are skipped.
            grad[d2 == 0.0] = _GRAD_CLIP
            grad[rep == targets] = 0.0
            np.add.at(emb, rep, grad * alpha)
            next_fire[fired] += epochs_per_sample[fired]

    return Embedding2D(ids=tuple(ids), coords=emb, seed=seed, n_neighbors=n_neighbors,
                       min_dist=min_dist, n_epochs=n_epochs)


def trustworthiness(vectors: list[FeatureVector], emb: Embedding2D, k: int) -> float:
    """Penalty-based score in [0, 1] for 2D neighbors that are not true neighbors."""
    ids, x = feature_matrix(vectors)
    if tuple(ids) != tuple(emb.ids):
        raise ParameterError("feature vector ids do not match embedding ids")
    n = x.shape[0]
    if not 1 <= k < n / 2:
        raise ParameterError(f"k must satisfy 1 <= k < n/2 = {n / 2}")
    d_high = _pairwise_distances(x)
    d_low = _pairwise_distances(np.asarray(emb.coords))
    np.fill_diagonal(d_high, np.inf)
    np.fill_diagonal(d_low, np.inf)
    order_high = np.argsort(d_high, axis=1, kind="stable")
    ranks = np.empty_like(order_high)
    rows = np.arange(n)[:, None]
    ranks[rows, order_high] = np.arange(n)[None, :] + 1
    low_knn = np.argsort(d_low, axis=1, kind="stable")[:, :k]
    high_knn_sets = [set(order_high[i, :k]) for i in range(n)]
    penalty = 0
    for i in range(n):
        for j in low_knn[i]:
            if j not in high_knn_sets[i]:
                penalty += ranks[i, j] - k
    return 1.0 - 2.0 / (n * k * (2 * n - 3 * k - 1)) * penalty
