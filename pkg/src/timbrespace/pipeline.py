"""Library analysis pipeline: features, embedding, and per-sample label assets."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import cochlea, labels
from .config import StudyConfig
from .dataset import SampleSet
from .embedding import Embedding2D, FeatureVector, concat_features, embed
from .errors import ParameterError
from .labels import (ColorLabel, ExemplarTexture, ShapeLabel, TextureLabel,
                     builtin_exemplars, kmedoids, shape_label, synth_texture,
                     texture_weights, wheel_calibration)
from .layout import scale_to_canvas


@dataclass
class LibraryContext:
    """Everything scene building needs, computed once per sample library."""

    samples: SampleSet
    config: StudyConfig
    filterbank: cochlea.Filterbank
    profiles: dict[str, cochlea.TimbreProfile]
    descriptors: dict[str, cochlea.TimbreDescriptors]
    features: list[FeatureVector]
    embedding: Embedding2D
    shapes: dict[str, ShapeLabel]
    shape_paths: dict[str, list[list[float]]]
    wheel_colors: dict[str, ColorLabel]
    descriptor_colors: dict[str, ColorLabel]
    texture_labels: dict[str, TextureLabel]
    exemplars: list[ExemplarTexture]
    medoid_ids: list[str]
    _texture_cache: dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def ids(self) -> list[str]:
        return self.samples.ids

    def colors(self, scheme: str | None = None) -> dict[str, ColorLabel]:
        scheme = scheme or self.config.color_scheme
        if scheme == "wheel-v1":
            return self.wheel_colors
        if scheme == "descriptor-v2":
            return self.descriptor_colors
        raise ParameterError(f"unknown color scheme {scheme!r}")

    def texture_image(self, sample_id: str) -> np.ndarray:
        """Synthesize (and cache) the grayscale texture for one sample."""
        if sample_id not in self._texture_cache:
            label = self.texture_labels[sample_id]
            img_seed = self.config.exemplar_seed + sum(sample_id.encode())
            self._texture_cache[sample_id] = synth_texture(
                label.medoid_weights, self.exemplars,
                size=self.config.texture_size, seed=img_seed)
        return self._texture_cache[sample_id]


def load_exemplars(directory: str | Path, size: int) -> list[ExemplarTexture]:
    """Read up to 8 grayscale images from a directory (sorted by name)."""
    from PIL import Image

    paths = sorted(Path(directory).glob("*.png"))[: labels.N_MEDOIDS]
    if len(paths) < labels.N_MEDOIDS:
        raise ParameterError(
            f"exemplar directory needs {labels.N_MEDOIDS} .png files, found {len(paths)}")
    out = []
    for p in paths:
        img = Image.open(p).convert("L").resize((size, size))
        out.append(ExemplarTexture(id=p.stem, pixels=np.asarray(img) / 255.0))
    return out


def build_library_context(samples: SampleSet, config: StudyConfig | None = None) -> LibraryContext:
    config = config or StudyConfig()
    fb = cochlea.make_filterbank(config.n_channels, config.fmin, config.fmax,
                                 config.sample_rate)
    profiles = {}
    descs = {}
    for s in samples:
        profile = cochlea.analyze(s, fb, config.frame_rate)
        if profile.spectral_envelope.sum() <= 0:
            continue  # silent samples carry no timbre and cannot be labeled
        profiles[s.id] = profile
        descs[s.id] = cochlea.descriptors(profile, fb)
    if len(profiles) < config.n_neighbors + 1:
        raise ParameterError(
            f"library has {len(profiles)} usable samples; "
            f"need at least n_neighbors + 1 = {config.n_neighbors + 1}")
    if len(profiles) < len(samples):
        samples = SampleSet(samples=tuple(s for s in samples if s.id in profiles))

    features = concat_features(profiles, config.pca_dim)
    emb = embed(features, n_neighbors=config.n_neighbors, min_dist=config.min_dist,
                n_epochs=config.n_epochs, seed=config.embed_seed)

    shapes = {}
    shape_paths = {}
    for sid, profile in profiles.items():
        duration = len(profile.temporal_envelope) / profile.frame_rate
        env201 = cochlea.resample_envelope(profile.temporal_envelope, duration,
                                           labels.SHAPE_POINTS)
        shapes[sid] = shape_label(env201)
        shape_paths[sid] = [[round(float(x), 6), round(float(y), 6)]
                            for x, y in shapes[sid].polygon]

    library_frame = scale_to_canvas(emb, config.canvas)
    center, max_radius = wheel_calibration(library_frame.positions)
    wheel_colors = {
        sid: labels.color_wheel(tuple(library_frame.positions[k]), center, max_radius)
        for k, sid in enumerate(library_frame.ids)}

    centroids = [d.spectral_centroid for d in descs.values()]
    lo, hi = min(centroids), max(centroids)
    if hi <= lo:
        hi = lo + 1e-9
    descriptor_colors = {
        sid: labels.color_descriptor(d, (lo, hi), hue_start=config.hue_start,
                                     hue_path=config.hue_path,
                                     saturation_mode=config.saturation_mode)
        for sid, d in descs.items()}

    medoid_ids = kmedoids(features, labels.N_MEDOIDS, seed=config.exemplar_seed)
    by_id = {v.source_id: v for v in features}
    medoid_vectors = [by_id[m] for m in medoid_ids]
    if config.exemplar_dir:
        exemplars = load_exemplars(config.exemplar_dir, config.texture_size)
    else:
        exemplars = builtin_exemplars(config.texture_size, seed=config.exemplar_seed)
    texture_labels_map = {
        sid: TextureLabel(medoid_weights=texture_weights(vec, medoid_vectors),
                          image_ref=sid)
        for sid, vec in by_id.items()}

    return LibraryContext(samples=samples, config=config, filterbank=fb,
                          profiles=profiles, descriptors=descs, features=features,
                          embedding=emb, shapes=shapes, shape_paths=shape_paths,
                          wheel_colors=wheel_colors,
                          descriptor_colors=descriptor_colors,
                          texture_labels=texture_labels_map, exemplars=exemplars,
                          medoid_ids=medoid_ids)
