import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from timbrespace.cochlea import (Filterbank, TimbreProfile, analyze, descriptors,
                                 make_filterbank, resample_envelope)
from timbrespace.dataset import SynthSpec, synth_sample
from timbrespace.errors import ParameterError, UndefinedDescriptorError

SR = 16_000


def tone(f0=440.0, duration=2.0, **kwargs):
    return synth_sample(SynthSpec(fundamental=f0, duration=duration, **kwargs), SR)


class TestFilterbank:
    def test_erb_grid_matches_independent_formula(self, fb):
        # oracle: invert the ERB-number scale on a uniform grid, written out
        # from the defining formula rather than the library helpers
        def number(f):
            return 21.4 * np.log10(4.37 * f / 1000.0 + 1.0)

        grid = np.linspace(number(26.0), number(7800.0), 42)
        expected = 1000.0 * (10.0 ** (grid / 21.4) - 1.0) / 4.37
        assert np.allclose(fb.center_freqs, expected, rtol=1e-12)
        assert abs(fb.center_freqs[0] - 26.0) < 1e-6
        assert abs(fb.center_freqs[-1] - 7800.0) < 1e-6

    def test_centers_strictly_increasing_below_nyquist(self, fb):
        assert np.all(np.diff(fb.center_freqs) > 0)
        assert fb.center_freqs[-1] < SR / 2

    def test_bandwidths_equal_erb_at_center(self, fb):
        expected = 24.7 * (4.37 * fb.center_freqs / 1000.0 + 1.0)
        assert np.allclose(fb.bandwidths, expected, rtol=1e-12)

    def test_degenerate_two_channel_bank(self):
        bank = make_filterbank(2, 100.0, 100.0001, SR)
        assert bank.n_channels == 2
        assert np.all(np.diff(bank.center_freqs) > 0)
        assert np.allclose(bank.center_freqs, 100.0, atol=0.01)

    def test_parameter_errors(self):
        with pytest.raises(ParameterError):
            make_filterbank(42, 26.0, 8000.0, SR)  # fmax at Nyquist
        with pytest.raises(ParameterError):
            make_filterbank(1, 26.0, 7800.0, SR)
        with pytest.raises(ParameterError):
            make_filterbank(42, 0.0, 7800.0, SR)
        with pytest.raises(ParameterError):
            make_filterbank(42, 500.0, 100.0, SR)


class TestAnalyze:
    def test_silence_gives_zero_profiles(self, fb):
        from timbrespace.dataset import AudioSample

        silent = AudioSample(id="s", signal=np.zeros(SR), sample_rate=SR)
        profile = analyze(silent, fb)
        assert np.all(profile.spectral_envelope == 0)
        assert np.all(profile.temporal_envelope == 0)
        assert np.all(profile.roughness_envelope == 0)

    def test_pure_tone_spectral_peak_at_nearest_channel(self, fb):
        profile = analyze(tone(440.0), fb)
        peak = int(profile.spectral_envelope.argmax())
        assert peak == int(np.abs(fb.center_freqs - 440.0).argmin())
        # energy falls off moving away from the peak channel
        env = profile.spectral_envelope
        for step in range(1, 4):
            assert env[peak - step] > env[peak - step - 1]
            assert env[peak + step] > env[peak + step + 1]

    def test_pure_tone_roughness_near_zero(self, fb):
        profile = analyze(tone(440.0), fb)
        assert profile.roughness_envelope.mean() < 0.02

    def test_am_tone_roughness_ratio(self, fb):
        plain = analyze(tone(440.0), fb)
        modulated = analyze(tone(440.0, am_rate=70.0, am_depth=1.0), fb)
        ratio = modulated.roughness_envelope.mean() / max(plain.roughness_envelope.mean(), 1e-12)
        assert ratio > 5.0

    def test_temporal_envelope_normalized(self, fb):
        profile = analyze(tone(440.0), fb)
        assert np.isclose(profile.temporal_envelope.max(), 1.0)
        assert np.all(profile.temporal_envelope >= 0)

    def test_envelope_lengths_match(self, fb):
        profile = analyze(tone(440.0, duration=1.3), fb)
        assert len(profile.roughness_envelope) == len(profile.temporal_envelope)
        assert len(profile.temporal_envelope) == round(1.3 * 200)

    def test_rate_mismatch_error(self, fb):
        sample = synth_sample(SynthSpec(fundamental=440.0, duration=0.2), 8000)
        with pytest.raises(ParameterError):
            analyze(sample, fb)

    def test_low_frame_rate_rejected(self, fb):
        with pytest.raises(ParameterError):
            analyze(tone(duration=0.2), fb, frame_rate=25)

    def test_scale_invariance(self, fb):
        sample = tone(330.0, n_harmonics=6, harmonic_rolloff=0.7, duration=1.0)
        profile = analyze(sample, fb)
        for alpha in (0.5, 0.117):
            from timbrespace.dataset import AudioSample

            scaled = AudioSample(id="a", signal=alpha * np.asarray(sample.signal),
                                 sample_rate=SR)
            p2 = analyze(scaled, fb)
            assert np.allclose(p2.temporal_envelope, profile.temporal_envelope, atol=1e-9)
            assert np.allclose(p2.roughness_envelope, profile.roughness_envelope, atol=1e-9)
            assert np.allclose(p2.spectral_envelope,
                               alpha ** 2 * profile.spectral_envelope, rtol=1e-9)
            d1 = descriptors(profile, fb)
            d2 = descriptors(p2, fb)
            assert np.isclose(d1.spectral_centroid, d2.spectral_centroid, rtol=1e-9)
            assert np.isclose(d1.spectral_flatness, d2.spectral_flatness, rtol=1e-9)

    def test_attack_time_visible_in_envelope(self, fb):
        def crossing_time(attack):
            sample = tone(440.0, duration=2.0, attack=attack)
            profile = analyze(sample, fb)
            idx = int(np.argmax(profile.temporal_envelope >= 0.9))
            return idx / profile.frame_rate

        assert crossing_time(0.5) - crossing_time(0.005) >= 0.3

    @settings(max_examples=10, deadline=None)
    @given(f0=st.floats(60, 2000), harmonics=st.integers(1, 4),
           am=st.sampled_from([0.0, 40.0, 90.0]), noise=st.floats(0, 1),
           seed=st.integers(0, 999))
    def test_profiles_always_finite(self, fb, f0, harmonics, am, noise, seed):
        spec = SynthSpec(fundamental=f0, n_harmonics=harmonics, am_rate=am,
                         am_depth=0.8 if am else 0.0, noise_mix=noise,
                         duration=0.3, seed=seed)
        profile = analyze(synth_sample(spec, SR), fb)
        for arr in (profile.spectral_envelope, profile.roughness_envelope,
                    profile.temporal_envelope):
            assert np.all(np.isfinite(arr))
            assert np.all(arr >= 0)


class TestDescriptors:
    def make_profile(self, envelope):
        n = len(envelope)
        return TimbreProfile(spectral_envelope=np.asarray(envelope, dtype=float),
                             roughness_envelope=np.zeros(4),
                             temporal_envelope=np.zeros(4), frame_rate=200.0)

    def test_single_channel_support(self, fb):
        env = np.zeros(fb.n_channels)
        env[7] = 2.5
        d = descriptors(self.make_profile(env), fb)
        assert np.isclose(d.spectral_centroid, fb.center_freqs[7])
        assert d.spectral_flatness < 1e-6

    def test_uniform_envelope(self, fb):
        env = np.full(fb.n_channels, 0.3)
        d = descriptors(self.make_profile(env), fb)
        assert np.isclose(d.spectral_flatness, 1.0)
        assert np.isclose(d.spectral_centroid, fb.center_freqs.mean())

    def test_zero_envelope_error(self, fb):
        with pytest.raises(UndefinedDescriptorError):
            descriptors(self.make_profile(np.zeros(fb.n_channels)), fb)

    def test_centroid_ordering_over_fundamentals(self, fb):
        cents = []
        for f0 in (200.0, 400.0, 800.0):
            profile = analyze(tone(f0, n_harmonics=8, harmonic_rolloff=1.0,
                                   duration=1.0), fb)
            cents.append(descriptors(profile, fb).spectral_centroid)
        assert cents[0] < cents[1] < cents[2]

    def test_centroid_decreases_with_rolloff(self, fb):
        cents = []
        for rolloff in (0.0, 0.5, 1.0, 2.0):
            profile = analyze(tone(220.0, n_harmonics=12, harmonic_rolloff=rolloff,
                                   duration=1.0), fb)
            cents.append(descriptors(profile, fb).spectral_centroid)
        assert all(a > b for a, b in zip(cents, cents[1:]))

    def test_flatness_ordering(self, fb):
        noise = analyze(tone(440.0, noise_mix=1.0, duration=1.0, seed=5), fb)
        harmonic = analyze(tone(440.0, n_harmonics=10, duration=1.0), fb)
        sine = analyze(tone(440.0, duration=1.0), fb)
        f_noise = descriptors(noise, fb).spectral_flatness
        f_harm = descriptors(harmonic, fb).spectral_flatness
        f_sine = descriptors(sine, fb).spectral_flatness
        assert f_noise > f_harm > f_sine


class TestResampleEnvelope:
    def test_constant_envelope(self):
        out = resample_envelope(np.ones(37), 4.0, 11)
        assert np.allclose(out, 1.0)

    def test_spacing_is_20ms_on_four_second_grid(self):
        out = resample_envelope(np.linspace(0, 1, 800), 4.0, 201)
        assert len(out) == 201
        positions = np.linspace(0.0, 4.0, 201)
        assert np.isclose(positions[1] - positions[0], 0.020)

    def test_linear_ramp_five_points(self):
        out = resample_envelope(np.linspace(0.0, 1.0, 101), 1.0, 5)
        assert np.allclose(out, [0.0, 0.25, 0.5, 0.75, 1.0])

    def test_errors(self):
        with pytest.raises(ParameterError):
            resample_envelope(np.array([]), 1.0, 5)
        with pytest.raises(ParameterError):
            resample_envelope(np.ones(10), 1.0, 1)
