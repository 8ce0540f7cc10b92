"""Cochlear timbre analysis.

An ERB-spaced gammatone filterbank decomposes each sample into subbands, from
which three per-sample profiles are computed:

* spectral envelope  — time-averaged power per channel,
* temporal envelope  — channel-summed smoothed amplitude, peak-normalized,
* roughness envelope — per-frame ratio of 20-170 Hz modulation energy to
  total envelope energy, summed over channels.

Scalar descriptors (spectral centroid, spectral flatness) are derived from
the spectral envelope for the descriptor-based color labels.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.signal import butter, sosfiltfilt

from .dataset import AudioSample
from .errors import ParameterError, UndefinedDescriptorError

GAMMATONE_ORDER = 4
# Bandwidth parameter of a 4th-order gammatone whose equivalent rectangular
# bandwidth equals the target ERB.
GAMMATONE_BW_FACTOR = 1.019

DEFAULT_CHANNELS = 42
DEFAULT_FMIN = 26.0
DEFAULT_FMAX = 7800.0
DEFAULT_FRAME_RATE = 200.0

# Rectified subband envelopes are pooled down to roughly this rate before
# smoothing; plenty of headroom above the 170 Hz modulation ceiling.
ENVELOPE_RATE_TARGET = 2000

ROUGHNESS_BAND = (20.0, 170.0)
ROUGHNESS_WINDOW = 0.100
TEMPORAL_LOWPASS = 20.0


def erb_bandwidth(freq_hz):
    """Equivalent rectangular bandwidth at a center frequency, in Hz."""
    return 24.7 * (4.37 * np.asarray(freq_hz) / 1000.0 + 1.0)


def erb_number(freq_hz):
    """Position of a frequency on the ERB-number scale."""
    return 21.4 * np.log10(4.37 * np.asarray(freq_hz) / 1000.0 + 1.0)


def erb_number_to_hz(erbs):
    return 1000.0 * (10.0 ** (np.asarray(erbs) / 21.4) - 1.0) / 4.37


@dataclass(frozen=True)
class Filterbank:
    center_freqs: np.ndarray
    bandwidths: np.ndarray
    sample_rate: int

    def __post_init__(self):
        for name in ("center_freqs", "bandwidths"):
            arr = np.asarray(getattr(self, name), dtype=np.float64)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n_channels(self) -> int:
        return len(self.center_freqs)


@dataclass(frozen=True)
class TimbreProfile:
    spectral_envelope: np.ndarray
    roughness_envelope: np.ndarray
    temporal_envelope: np.ndarray
    frame_rate: float

    def __post_init__(self):
        for name in ("spectral_envelope", "roughness_envelope", "temporal_envelope"):
            arr = np.asarray(getattr(self, name), dtype=np.float64)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if len(self.roughness_envelope) != len(self.temporal_envelope):
            raise ParameterError("roughness and temporal envelopes must be equal length")


@dataclass(frozen=True)
class TimbreDescriptors:
    spectral_centroid: float
    spectral_flatness: float


def make_filterbank(n_channels: int = DEFAULT_CHANNELS, fmin: float = DEFAULT_FMIN,
                    fmax: float = DEFAULT_FMAX, sample_rate: int = 16_000) -> Filterbank:
    """Filterbank with centers uniformly spaced on the ERB-number scale."""
    if not 0 < fmin < fmax:
        raise ParameterError("need 0 < fmin < fmax")
    if fmax >= sample_rate / 2:
        raise ParameterError(f"fmax {fmax} must be below Nyquist {sample_rate / 2}")
    if n_channels < 2:
        raise ParameterError("need at least 2 channels")
    grid = np.linspace(erb_number(fmin), erb_number(fmax), n_channels)
    centers = erb_number_to_hz(grid)
    return Filterbank(center_freqs=centers, bandwidths=erb_bandwidth(centers),
                      sample_rate=sample_rate)


def gammatone_response(fb: Filterbank, freqs: np.ndarray) -> np.ndarray:
    """Magnitude response of each channel on the given frequency grid."""
    fc = fb.center_freqs[:, None]
    bw = GAMMATONE_BW_FACTOR * fb.bandwidths[:, None]
    return (1.0 + ((freqs[None, :] - fc) / bw) ** 2) ** (-GAMMATONE_ORDER / 2)


@lru_cache(maxsize=8)
def _lowpass_sos(cutoff: float, rate: float):
    return butter(2, cutoff / (rate / 2), btype="low", output="sos")


@lru_cache(maxsize=8)
def _bandpass_sos(lo: float, hi: float, rate: float):
    return butter(2, [lo / (rate / 2), hi / (rate / 2)], btype="band", output="sos")


def _block_mean(x: np.ndarray, pool: int) -> np.ndarray:
    if pool == 1:
        return x
    m = (len(x) // pool) * pool
    return x[:m].reshape(-1, pool).mean(axis=1)


def analyze(sample: AudioSample, fb: Filterbank,
            frame_rate: float = DEFAULT_FRAME_RATE) -> TimbreProfile:
    """Extract the three timbre profiles of one sample.

    Subbands come from zero-phase FFT-domain gammatone filtering; channel
    amplitude envelopes are half-wave rectified then pooled to ~2 kHz, where
    a 20 Hz low-pass yields the smooth envelope and a 20-170 Hz band-pass
    the modulation component used for roughness.
    """
    if sample.sample_rate != fb.sample_rate:
        raise ParameterError(
            f"sample rate {sample.sample_rate} != filterbank rate {fb.sample_rate}")
    if frame_rate < 50:
        raise ParameterError("frame_rate must be at least 50 Hz")
    sr = sample.sample_rate
    n = len(sample.signal)
    n_frames = max(1, int(round(sample.duration * frame_rate)))
    frame_times = np.arange(n_frames) / frame_rate

    if n == 0 or not np.any(sample.signal):
        zeros = np.zeros(n_frames)
        return TimbreProfile(spectral_envelope=np.zeros(fb.n_channels),
                             roughness_envelope=zeros, temporal_envelope=zeros.copy(),
                             frame_rate=frame_rate)

    # Zero-pad so the circular convolution of the zero-phase filters cannot
    # wrap the onset/offset transients around the signal boundaries.
    pad = int(round(0.15 * sr))
    n_fft = n + 2 * pad
    spectrum = np.fft.rfft(sample.signal, n_fft)
    freqs = np.fft.rfftfreq(n_fft, 1.0 / sr)
    response = gammatone_response(fb, freqs)

    pool = max(1, int(sr // ENVELOPE_RATE_TARGET))
    env_rate = sr / pool
    spectral = np.empty(fb.n_channels)
    smooth_sum = None
    mod_energy = None
    env_energy = None
    for c in range(fb.n_channels):
        subband = np.fft.irfft(spectrum * response[c], n_fft)[:n]
        spectral[c] = np.mean(subband ** 2)
        env = _block_mean(np.maximum(subband, 0.0), pool)
        smooth = sosfiltfilt(_lowpass_sos(TEMPORAL_LOWPASS, env_rate), env)
        mod = sosfiltfilt(_bandpass_sos(*ROUGHNESS_BAND, env_rate), env)
        smooth_sum = smooth if smooth_sum is None else smooth_sum + smooth
        sq_mod, sq_env = mod ** 2, env ** 2
        mod_energy = sq_mod if mod_energy is None else mod_energy + sq_mod
        env_energy = sq_env if env_energy is None else env_energy + sq_env

    env_times = (np.arange(len(smooth_sum)) * pool + (pool - 1) / 2) / sr
    temporal = np.interp(frame_times, env_times, np.maximum(smooth_sum, 0.0))
    top = temporal.max()
    if top > 0:
        temporal = temporal / top

    half = int(round(ROUGHNESS_WINDOW / 2 * env_rate))
    cs_mod = np.concatenate([[0.0], np.cumsum(mod_energy)])
    cs_env = np.concatenate([[0.0], np.cumsum(env_energy)])
    centers = np.clip(np.round((frame_times - env_times[0]) * env_rate).astype(int),
                      0, len(mod_energy) - 1)
    lo = np.maximum(centers - half, 0)
    hi = np.minimum(centers + half + 1, len(mod_energy))
    num = cs_mod[hi] - cs_mod[lo]
    den = cs_env[hi] - cs_env[lo]
    roughness = np.divide(num, den, out=np.zeros_like(num), where=den > 0)

    return TimbreProfile(spectral_envelope=spectral, roughness_envelope=roughness,
                         temporal_envelope=temporal, frame_rate=frame_rate)


def descriptors(profile: TimbreProfile, fb: Filterbank) -> TimbreDescriptors:
    """Spectral centroid (brightness) and flatness (noisiness) of a profile."""
    env = profile.spectral_envelope
    if len(env) != fb.n_channels:
        raise ParameterError("profile does not match filterbank")
    total = env.sum()
    if total <= 0:
        raise UndefinedDescriptorError("all-zero spectral envelope")
    centroid = float(np.dot(fb.center_freqs, env) / total)
    scaled = env / env.max()
    geometric = np.exp(np.mean(np.log(np.maximum(scaled, 1e-12))))
    flatness = float(min(1.0, geometric / np.mean(scaled)))
    return TimbreDescriptors(spectral_centroid=centroid, spectral_flatness=flatness)


def resample_envelope(env: np.ndarray, duration: float, n_points: int) -> np.ndarray:
    """Linear resample onto n_points uniform positions spanning [0, duration]."""
    env = np.asarray(env, dtype=np.float64)
    if env.size == 0:
        raise ParameterError("empty envelope")
    if n_points < 2:
        raise ParameterError("n_points must be at least 2")
    if duration <= 0:
        raise ParameterError("duration must be positive")
    if env.size == 1:
        return np.full(n_points, env[0])
    src = np.linspace(0.0, duration, env.size)
    dst = np.linspace(0.0, duration, n_points)
    out = np.interp(dst, src, env)
    if abs(env.max() - 1.0) < 1e-9 and out.max() > 0:
        out = out / out.max()
    return out
