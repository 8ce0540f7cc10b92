import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.io import wavfile
from scipy.signal import resample_poly

from timbrespace.dataset import (SampleMeta, SampleSet, SynthSpec,
                                 load_sample, meta_filter, parse_nsynth_stem,
                                 peak_normalize, resample_linear, scan_library,
                                 synth_sample, write_wav)
from timbrespace.errors import (AliasingError, DecodeError, EmptyInputError,
                                ParameterError)

SR = 16_000


def write_pcm(path, signal, rate=SR):
    wavfile.write(str(path), rate, (np.asarray(signal) * 32767).astype(np.int16))


def spectral_peak_hz(signal, rate):
    spectrum = np.abs(np.fft.rfft(signal * np.hanning(len(signal))))
    return np.fft.rfftfreq(len(signal), 1 / rate)[spectrum.argmax()]


class TestLoadSample:
    def test_silence_four_seconds(self, tmp_path):
        path = tmp_path / "silence.wav"
        write_pcm(path, np.zeros(4 * SR))
        sample = load_sample(path, target_rate=SR)
        assert len(sample.signal) == 64_000
        assert sample.duration == 4.0
        assert np.all(sample.signal == 0.0)
        assert sample.id == "silence"

    def test_stereo_channels_cancel(self, tmp_path):
        path = tmp_path / "cancel.wav"
        stereo = np.column_stack([np.full(SR, 0.5), np.full(SR, -0.5)])
        wavfile.write(str(path), SR, (stereo * 32767).astype(np.int16))
        sample = load_sample(path, target_rate=SR)
        assert np.allclose(sample.signal, 0.0, atol=1e-4)

    def test_resample_48k_to_16k_sine(self, tmp_path):
        rate_in, dur, f0 = 48_000, 2.0, 440.0
        t = np.arange(int(rate_in * dur)) / rate_in
        path = tmp_path / "sine48.wav"
        write_pcm(path, 0.8 * np.sin(2 * np.pi * f0 * t), rate=rate_in)
        sample = load_sample(path, target_rate=SR)
        assert abs(len(sample.signal) - dur * SR) <= 1
        assert abs(spectral_peak_hz(sample.signal, SR) - f0) < 2.0
        # independent oracle: polyphase resampler agrees closely on a sine
        oracle = resample_poly(0.8 * np.sin(2 * np.pi * f0 * t), SR, rate_in)
        oracle = peak_normalize(oracle)
        m = min(len(oracle), len(sample.signal))
        corr = np.corrcoef(sample.signal[:m], oracle[:m])[0, 1]
        assert corr > 0.99

    def test_float32_wav(self, tmp_path):
        path = tmp_path / "f32.wav"
        t = np.arange(SR) / SR
        wavfile.write(str(path), SR, np.sin(2 * np.pi * 100 * t).astype(np.float32))
        sample = load_sample(path, target_rate=SR)
        assert np.isclose(np.abs(sample.signal).max(), 0.99)

    def test_unreadable_file_decode_error(self, tmp_path):
        path = tmp_path / "garbage.wav"
        path.write_bytes(b"not really a wav file")
        with pytest.raises(DecodeError):
            load_sample(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_sample(tmp_path / "nope.wav")

    def test_normalization_window(self, tmp_path):
        path = tmp_path / "quiet.wav"
        t = np.arange(SR) / SR
        write_pcm(path, 0.05 * np.sin(2 * np.pi * 330 * t))
        sample = load_sample(path)
        assert 0.98 <= np.abs(sample.signal).max() <= 1.0


class TestScanLibrary:
    def make_corpus(self, root):
        t = np.arange(SR) / SR
        names = ["guitar_acoustic_001-064-100", "guitar_acoustic_002-060-100",
                 "synth_lead_synthetic_003-064-100"]
        for k, name in enumerate(names):
            write_pcm(root / f"{name}.wav", 0.5 * np.sin(2 * np.pi * (220 + 110 * k) * t))
        return names

    def test_pitch_filter(self, tmp_path):
        self.make_corpus(tmp_path)
        result = scan_library(tmp_path, filter=meta_filter(pitch=64))
        assert all(s.meta.pitch == 64 for s in result.set)
        assert len(result.set) == 2

    def test_empty_directory(self, tmp_path):
        with pytest.raises(EmptyInputError):
            scan_library(tmp_path)

    def test_corrupt_files_skipped(self, tmp_path):
        self.make_corpus(tmp_path)
        (tmp_path / "broken.wav").write_bytes(b"\x00\x01bad")
        result = scan_library(tmp_path)
        assert len(result.set) == 3
        assert result.skipped == 1

    def test_deterministic_repeat(self, tmp_path):
        self.make_corpus(tmp_path)
        first = scan_library(tmp_path)
        second = scan_library(tmp_path)
        assert first.set.ids == second.set.ids
        for a, b in zip(first.set, second.set):
            assert np.array_equal(a.signal, b.signal)

    def test_filter_soundness(self, tmp_path):
        names = self.make_corpus(tmp_path)
        predicate = meta_filter(pitch=64)
        result = scan_library(tmp_path, filter=predicate)
        included = set(result.set.ids)
        for name in names:
            expected = parse_nsynth_stem(name).pitch == 64
            assert (name in included) == expected

    def test_recursive_scan_sorted(self, tmp_path):
        (tmp_path / "sub").mkdir()
        t = np.arange(SR) / SR
        write_pcm(tmp_path / "b.wav", 0.5 * np.sin(2 * np.pi * 220 * t))
        write_pcm(tmp_path / "sub" / "a.wav", 0.5 * np.sin(2 * np.pi * 330 * t))
        result = scan_library(tmp_path)
        assert result.set.ids == ["a", "b"]


class TestNsynthParsing:
    def test_standard_name(self):
        meta = parse_nsynth_stem("keyboard_acoustic_004-064-127")
        assert meta == SampleMeta(pitch=64, velocity=127, family="keyboard")

    def test_family_with_underscore(self):
        meta = parse_nsynth_stem("synth_lead_synthetic_003-022-050")
        assert meta.family == "synth_lead"
        assert meta.pitch == 22

    def test_unparseable_gives_nulls(self):
        meta = parse_nsynth_stem("my cool sample (3)")
        assert meta == SampleMeta()

    def test_out_of_range_pitch_rejected(self):
        assert parse_nsynth_stem("a_b_001-300-100").pitch is None


class TestSynthSample:
    def test_pure_sine_peak(self):
        sample = synth_sample(SynthSpec(fundamental=440.0, duration=2.0), SR)
        assert abs(spectral_peak_hz(sample.signal, SR) - 440.0) < 1.0

    def test_determinism(self):
        spec = SynthSpec(fundamental=330.0, n_harmonics=5, harmonic_rolloff=1.0,
                         noise_mix=0.3, seed=11, duration=1.0)
        a = synth_sample(spec, SR)
        b = synth_sample(spec, SR)
        assert np.array_equal(a.signal, b.signal)

    def test_am_envelope_oscillates_at_70hz(self):
        from scipy.signal import hilbert

        sample = synth_sample(SynthSpec(fundamental=440.0, am_rate=70.0,
                                        am_depth=1.0, duration=2.0), SR)
        envelope = np.abs(hilbert(sample.signal))
        envelope -= envelope.mean()
        peak = spectral_peak_hz(envelope, SR)
        assert abs(peak - 70.0) < 2.0

    def test_aliasing_error(self):
        with pytest.raises(AliasingError):
            synth_sample(SynthSpec(fundamental=3000.0, n_harmonics=4), SR)

    def test_spec_invariant_errors(self):
        with pytest.raises(ParameterError):
            SynthSpec(fundamental=440.0, attack=3.0, decay=2.0, duration=4.0)
        with pytest.raises(ParameterError):
            SynthSpec(fundamental=440.0, am_depth=1.5)

    @settings(max_examples=25, deadline=None)
    @given(f0=st.floats(50, 900), harmonics=st.integers(1, 8),
           rolloff=st.floats(0, 3), noise=st.floats(0, 1), seed=st.integers(0, 2 ** 20))
    def test_signals_bounded_and_finite(self, f0, harmonics, rolloff, noise, seed):
        spec = SynthSpec(fundamental=f0, n_harmonics=harmonics,
                         harmonic_rolloff=rolloff, noise_mix=noise,
                         duration=0.25, seed=seed)
        sample = synth_sample(spec, SR)
        assert np.all(np.isfinite(sample.signal))
        assert np.abs(sample.signal).max() <= 1.0


class TestSampleSet:
    def test_duplicate_ids_rejected(self):
        s = synth_sample(SynthSpec(fundamental=100.0, duration=0.1), SR, sample_id="x")
        with pytest.raises(ParameterError):
            SampleSet(samples=(s, s))

    def test_canonical_ordering(self):
        a = synth_sample(SynthSpec(fundamental=100.0, duration=0.1), SR, sample_id="b")
        b = synth_sample(SynthSpec(fundamental=200.0, duration=0.1), SR, sample_id="a")
        assert SampleSet(samples=(a, b)).ids == ["a", "b"]


def test_write_wav_roundtrip(tmp_path):
    sample = synth_sample(SynthSpec(fundamental=250.0, duration=0.5), SR)
    path = tmp_path / "out.wav"
    write_wav(path, sample)
    loaded = load_sample(path)
    assert len(loaded.signal) == len(sample.signal)
    assert np.corrcoef(loaded.signal, sample.signal)[0, 1] > 0.999


def test_resample_linear_identity():
    x = np.arange(10.0)
    assert np.array_equal(resample_linear(x, SR, SR), x)
