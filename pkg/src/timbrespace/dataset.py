"""Sample library loading, metadata filtering, and synthetic test tones.

Audio is decoded from PCM .wav containers, downmixed to mono, resampled by
linear interpolation to the engine rate (16 kHz by default), and
peak-normalized. Metadata is parsed best-effort from NSynth-style filenames
(``family_source_instrument-pitch-velocity``).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np
from scipy.io import wavfile

from .errors import AliasingError, DecodeError, EmptyInputError, ParameterError

DEFAULT_SAMPLE_RATE = 16_000
NORMALIZATION_PEAK = 0.99

_NSYNTH_STEM = re.compile(r"^(?P<head>.+)-(?P<pitch>\d{1,3})-(?P<velocity>\d{1,3})$")


@dataclass(frozen=True)
class SampleMeta:
    pitch: Optional[int] = None
    velocity: Optional[int] = None
    source_path: Optional[str] = None
    family: Optional[str] = None

    def __post_init__(self):
        if self.pitch is not None and not 0 <= self.pitch <= 127:
            raise ParameterError(f"pitch {self.pitch} outside MIDI range [0, 127]")


@dataclass(frozen=True)
class AudioSample:
    """A decoded mono signal plus metadata. Immutable once constructed."""

    id: str
    signal: np.ndarray
    sample_rate: int
    meta: SampleMeta = field(default_factory=SampleMeta)

    def __post_init__(self):
        sig = np.asarray(self.signal, dtype=np.float64)
        sig.setflags(write=False)
        object.__setattr__(self, "signal", sig)
        if sig.ndim != 1:
            raise ParameterError("signal must be one-dimensional")
        if self.sample_rate <= 0:
            raise ParameterError("sample_rate must be positive")

    @property
    def duration(self) -> float:
        return len(self.signal) / self.sample_rate


@dataclass(frozen=True)
class SynthSpec:
    """Deterministic additive-synthesis recipe with known timbral ground truth."""

    fundamental: float
    n_harmonics: int = 1
    harmonic_rolloff: float = 0.0
    attack: float = 0.0
    decay: float = 0.0
    am_rate: float = 0.0
    am_depth: float = 0.0
    noise_mix: float = 0.0
    duration: float = 4.0
    seed: int = 0

    def __post_init__(self):
        if self.fundamental <= 0 or self.n_harmonics < 1:
            raise ParameterError("fundamental must be > 0 and n_harmonics >= 1")
        if self.attack < 0 or self.decay < 0 or self.am_rate < 0:
            raise ParameterError("rates and ramp times must be >= 0")
        if self.attack + self.decay > self.duration:
            raise ParameterError("attack + decay must not exceed duration")
        if not (0.0 <= self.am_depth <= 1.0 and 0.0 <= self.noise_mix <= 1.0):
            raise ParameterError("am_depth and noise_mix must lie in [0, 1]")


@dataclass(frozen=True)
class SampleSet:
    """Ordered, duplicate-free collection of samples (lexicographic by id)."""

    samples: tuple[AudioSample, ...]

    def __post_init__(self):
        ordered = tuple(sorted(self.samples, key=lambda s: s.id))
        ids = [s.id for s in ordered]
        if len(set(ids)) != len(ids):
            dupes = sorted({i for i in ids if ids.count(i) > 1})
            raise ParameterError(f"duplicate sample ids: {dupes}")
        object.__setattr__(self, "samples", ordered)

    def __len__(self) -> int:
        return len(self.samples)

    def __iter__(self):
        return iter(self.samples)

    @property
    def ids(self) -> list[str]:
        return [s.id for s in self.samples]

    def by_id(self, sample_id: str) -> AudioSample:
        for s in self.samples:
            if s.id == sample_id:
                return s
        raise KeyError(sample_id)


@dataclass(frozen=True)
class ScanResult:
    set: SampleSet
    skipped: int


def parse_nsynth_stem(stem: str) -> SampleMeta:
    """Parse ``family_source_instrument-pitch-velocity``; null fields if no match."""
    m = _NSYNTH_STEM.match(stem)
    if m is None:
        return SampleMeta()
    pitch = int(m.group("pitch"))
    velocity = int(m.group("velocity"))
    if pitch > 127:
        return SampleMeta()
    head = m.group("head").rsplit("_", 2)
    family = head[0] if len(head) == 3 else None
    return SampleMeta(pitch=pitch, velocity=velocity, family=family)


def _pcm_to_float(data: np.ndarray) -> np.ndarray:
    if data.dtype == np.int16:
        return data / 32768.0
    if data.dtype == np.int32:
        return data / 2147483648.0
    if data.dtype == np.uint8:
        return (data.astype(np.float64) - 128.0) / 128.0
    if data.dtype in (np.float32, np.float64):
        return data.astype(np.float64)
    raise DecodeError(f"unsupported PCM dtype {data.dtype}")


def resample_linear(signal: np.ndarray, src_rate: int, dst_rate: int) -> np.ndarray:
    """Linear-interpolation resample; length = round(duration * dst_rate)."""
    if src_rate == dst_rate:
        return np.asarray(signal, dtype=np.float64)
    n_src = len(signal)
    n_dst = int(round(n_src * dst_rate / src_rate))
    t_src = np.arange(n_src) / src_rate
    t_dst = np.arange(n_dst) / dst_rate
    return np.interp(t_dst, t_src, signal)


def peak_normalize(signal: np.ndarray, peak: float = NORMALIZATION_PEAK) -> np.ndarray:
    top = np.max(np.abs(signal)) if len(signal) else 0.0
    if top == 0.0:
        return signal
    return signal * (peak / top)


def load_sample(path: str | Path, target_rate: int = DEFAULT_SAMPLE_RATE) -> AudioSample:
    """Load a PCM .wav file as a normalized mono AudioSample at target_rate."""
    path = Path(path)
    try:
        src_rate, data = wavfile.read(str(path))
    except FileNotFoundError:
        raise
    except Exception as exc:
        raise DecodeError(f"cannot decode {path}: {exc}") from exc
    if data.size == 0:
        raise EmptyInputError(f"{path} contains no samples")
    if data.ndim == 2:
        if data.shape[1] > 2:
            raise DecodeError(f"{path}: more than 2 channels")
        data = _pcm_to_float(data).mean(axis=1)
    else:
        data = _pcm_to_float(data)
    signal = peak_normalize(resample_linear(data, src_rate, target_rate))
    stem = path.stem
    meta = parse_nsynth_stem(stem)
    meta = SampleMeta(pitch=meta.pitch, velocity=meta.velocity,
                      source_path=str(path), family=meta.family)
    return AudioSample(id=stem, signal=signal, sample_rate=target_rate, meta=meta)


def meta_filter(pitch: Optional[int] = None, velocity: Optional[int] = None,
                family: Optional[str] = None) -> Callable[[SampleMeta], bool]:
    """Predicate matching samples whose metadata equals every given key."""

    def predicate(meta: SampleMeta) -> bool:
        if pitch is not None and meta.pitch != pitch:
            return False
        if velocity is not None and meta.velocity != velocity:
            return False
        if family is not None and meta.family != family:
            return False
        return True

    return predicate


def scan_library(directory: str | Path,
                 filter: Optional[Callable[[SampleMeta], bool]] = None,
                 target_rate: int = DEFAULT_SAMPLE_RATE) -> ScanResult:
    """Recursively load all decodable .wav files matching the filter.

    Bad files are skipped and counted. Raises EmptyInputError when nothing
    matches. The result is deterministic: sorted by id regardless of
    filesystem order.
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise ParameterError(f"{directory} is not a directory")
    paths = sorted(p for p in directory.rglob("*") if p.suffix.lower() == ".wav")
    samples = []
    skipped = 0
    for p in paths:
        try:
            sample = load_sample(p, target_rate=target_rate)
        except (DecodeError, EmptyInputError):
            skipped += 1
            continue
        if filter is None or filter(sample.meta):
            samples.append(sample)
    if not samples:
        raise EmptyInputError(f"no decodable audio files matching filter under {directory}")
    return ScanResult(set=SampleSet(samples=tuple(samples)), skipped=skipped)


def synth_sample(spec: SynthSpec, sample_rate: int = DEFAULT_SAMPLE_RATE,
                 sample_id: Optional[str] = None) -> AudioSample:
    """Render a SynthSpec to a peak-normalized AudioSample.

    Harmonic k has amplitude k**(-rolloff); the amplitude envelope is a linear
    attack ramp followed by exponential decay (time constant = spec.decay,
    no decay when 0); AM is sinusoidal; seeded white noise is mixed in last.
    """
    if spec.fundamental * spec.n_harmonics > sample_rate / 2:
        raise AliasingError(
            f"highest partial {spec.fundamental * spec.n_harmonics:.1f} Hz exceeds "
            f"Nyquist {sample_rate / 2:.1f} Hz")
    n = int(round(spec.duration * sample_rate))
    t = np.arange(n) / sample_rate
    tone = np.zeros(n)
    for k in range(1, spec.n_harmonics + 1):
        tone += k ** (-spec.harmonic_rolloff) * np.sin(2 * np.pi * k * spec.fundamental * t)
    env = np.ones(n)
    if spec.attack > 0:
        ramp = t < spec.attack
        env[ramp] = t[ramp] / spec.attack
    if spec.decay > 0:
        after = t >= spec.attack
        env[after] *= np.exp(-(t[after] - spec.attack) / spec.decay)
    if spec.am_rate > 0 and spec.am_depth > 0:
        env *= (1.0 - spec.am_depth / 2.0) + (spec.am_depth / 2.0) * np.cos(
            2 * np.pi * spec.am_rate * t)
    signal = tone * env
    if spec.noise_mix > 0:
        noise = np.random.default_rng(spec.seed).standard_normal(n)
        signal = (1.0 - spec.noise_mix) * signal + spec.noise_mix * noise * env
    signal = peak_normalize(signal)
    if sample_id is None:
        sample_id = f"synth-{spec.fundamental:g}hz-{spec.seed}"
    return AudioSample(id=sample_id, signal=signal, sample_rate=sample_rate)


def write_wav(path, sample: AudioSample) -> None:
    """Write a sample as 16-bit PCM to a path or file-like object."""
    data = np.clip(sample.signal, -1.0, 1.0)
    target = str(path) if isinstance(path, (str, Path)) else path
    wavfile.write(target, sample.sample_rate, (data * 32767.0).astype(np.int16))
