from __future__ import annotations

import wave

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from thaifront.audio import (
    LOG_FLOOR,
    MelConfig,
    ProsodyFeatures,
    UtteranceFeatures,
    Waveform,
    extract_energy,
    extract_features,
    extract_pitch,
    hz_to_mel,
    mel_filterbank,
    mel_spectrogram,
    mel_to_hz,
    phoneme_durations,
    read_wav,
    span_average,
    style_vector,
)
from thaifront.errors import ValidationError

from .oracles import cosine_extended, span_means

SR = 24000


def sine(freq, seconds=1.0, amp=0.5, sr=SR):
    t = np.arange(int(sr * seconds)) / sr
    return Waveform(amp * np.sin(2 * np.pi * freq * t), sr)


def noise(seconds=1.0, amp=0.3, seed=0, sr=SR):
    rng = np.random.default_rng(seed)
    return Waveform(np.clip(amp * rng.standard_normal(int(sr * seconds)), -1, 1), sr)


def silence(seconds=1.0, sr=SR):
    return Waveform(np.zeros(int(sr * seconds)), sr)


class TestWaveform:
    def test_rejects_stereo(self):
        with pytest.raises(ValidationError):
            Waveform(np.zeros((10, 2)), SR)

    def test_rejects_clipping_and_nan(self):
        with pytest.raises(ValidationError):
            Waveform(np.array([0.0, 1.5]), SR)
        with pytest.raises(ValidationError):
            Waveform(np.array([0.0, np.nan]), SR)

    def test_read_only(self):
        w = sine(100, 0.01)
        with pytest.raises(ValueError):
            w.samples[0] = 1.0

    def test_wav_round_trip(self, tmp_path):
        from thaifront.audio import write_wav

        w = sine(300, 0.2)
        write_wav(tmp_path / "a.wav", w)
        back = read_wav(tmp_path / "a.wav")
        assert back.sample_rate == SR
        assert np.max(np.abs(back.samples - w.samples)) < 1 / 16000

    def test_multichannel_wav_rejected(self, tmp_path):
        with wave.open(str(tmp_path / "s.wav"), "wb") as f:
            f.setnchannels(2)
            f.setsampwidth(2)
            f.setframerate(SR)
            f.writeframes(b"\0" * 400)
        with pytest.raises(ValidationError, match="channels"):
            read_wav(tmp_path / "s.wav")


class TestMel:
    def test_one_second_frame_count(self):
        mel = mel_spectrogram(sine(440))
        assert mel.frames.shape == (90, 80)

    def test_silence_sits_on_floor(self):
        mel = mel_spectrogram(silence())
        assert np.all(mel.frames == np.log(LOG_FLOOR))

    def test_sine_peaks_in_its_band(self):
        cfg = MelConfig()
        mel = mel_spectrogram(sine(1000), cfg)
        edges = mel_to_hz(np.linspace(hz_to_mel(cfg.fmin), hz_to_mel(cfg.fmax), cfg.n_mels + 2))
        peak = int(np.argmax(mel.frames.mean(axis=0)))
        assert edges[peak] <= 1000 <= edges[peak + 2]

    @pytest.mark.parametrize("cfg", [MelConfig(), MelConfig(16000, 512, 128, 400, 40, 50, 8000),
                                     MelConfig(8000, 256, 80, 256, 64, 0, 4000)])
    def test_filterbank_rows_normalised(self, cfg):
        fb = mel_filterbank(cfg)
        assert fb.shape == (cfg.n_mels, cfg.fft_size // 2 + 1)
        assert np.allclose(fb.sum(axis=1), 1.0)
        assert np.all(fb >= 0)

    def test_short_signal(self):
        with pytest.raises(ValidationError, match="shorter"):
            mel_spectrogram(Waveform(np.zeros(100), SR))

    def test_rate_mismatch(self):
        with pytest.raises(ValidationError):
            mel_spectrogram(sine(100), MelConfig(sample_rate=16000, fmax=8000))

    @pytest.mark.parametrize("kw", [dict(win=2048), dict(hop=0), dict(fmax=13000), dict(fmin=12000)])
    def test_bad_config(self, kw):
        with pytest.raises(ValidationError):
            MelConfig(**kw)


class TestPitch:
    def test_pure_tone(self):
        f0 = extract_pitch(sine(220))
        assert np.all(np.abs(f0 - 220) <= 3)

    @pytest.mark.parametrize("freq", [90, 150, 310])
    def test_other_tones(self, freq):
        f0 = extract_pitch(sine(freq, 0.5))
        assert np.median(f0) == pytest.approx(freq, abs=3)

    def test_noise_mostly_unvoiced(self):
        f0 = extract_pitch(noise())
        assert np.mean(f0 == 0) >= 0.9

    def test_silence_unvoiced(self):
        assert np.all(extract_pitch(silence()) == 0)

    def test_shares_mel_grid(self):
        w = sine(200, 0.7)
        assert extract_pitch(w).shape[0] == mel_spectrogram(w).n_frames

    def test_low_rate_rejected(self):
        with pytest.raises(ValidationError):
            extract_pitch(Waveform(np.zeros(4000), 4000), MelConfig(4000, 256, 64, 256, 20, 0, 2000))


class TestEnergy:
    def test_doubling_amplitude_doubles_energy(self):
        w = sine(500, amp=0.2)
        e1, e2 = extract_energy(mel_spectrogram(w)), extract_energy(mel_spectrogram(w.scaled(2)))
        assert np.allclose(e2, 2 * e1, rtol=1e-9)

    def test_recompute_from_mel(self):
        mel = mel_spectrogram(noise(0.5))
        lin = np.exp(mel.frames)
        assert np.allclose(extract_energy(mel), np.sqrt((lin ** 2).mean(axis=1)))


class TestDurations:
    def test_even_split(self):
        assert phoneme_durations(4, 10).tolist() == [3, 3, 2, 2]

    def test_alignment_used(self):
        assert phoneme_durations(2, 5, [("k", 2), ("a", 3)]).tolist() == [2, 3]
        assert phoneme_durations(2, 5, [1, 4]).tolist() == [1, 4]

    @pytest.mark.parametrize("args", [(2, 5, [("k", 2)]), (2, 5, [("k", 2), ("a", 2)]), (2, 5, [6, -1]),
                                      (3, 2, None), (0, 5, None)])
    def test_mismatch(self, args):
        with pytest.raises(ValidationError):
            phoneme_durations(*args)

    @given(st.integers(1, 50), st.integers(0, 200))
    def test_even_split_properties(self, n, extra):
        d = phoneme_durations(n, n + extra)
        assert d.sum() == n + extra and d.max() - d.min() <= 1
        assert list(d) == sorted(d, reverse=True)

    def test_prosody_features_validate(self):
        with pytest.raises(ValidationError):
            ProsodyFeatures(np.array([2, 2]), np.zeros(5), np.zeros(5))
        with pytest.raises(ValidationError):
            ProsodyFeatures(np.array([5]), np.zeros(5), np.zeros(4))


class TestStyle:
    def test_dimension(self):
        assert style_vector(mel_spectrogram(sine(300)), 16).shape == (16,)

    def test_identical_input(self):
        a = style_vector(mel_spectrogram(noise(seed=1)))
        b = style_vector(mel_spectrogram(noise(seed=1)))
        assert cosine_extended(a, b) == pytest.approx(1.0, abs=1e-12)

    def test_silence_vs_noise_differ(self):
        a = style_vector(mel_spectrogram(silence()))
        b = style_vector(mel_spectrogram(noise()))
        assert cosine_extended(a, b) < 0.9

    def test_needs_two_frames(self):
        with pytest.raises(ValidationError):
            style_vector(mel_spectrogram(Waveform(np.zeros(1024), SR)))


class TestSpanAverage:
    @given(st.lists(st.integers(0, 5), min_size=1, max_size=8), st.integers(0, 2**31))
    def test_matches_oracle(self, durations, seed):
        values = np.random.default_rng(seed).standard_normal(sum(durations))
        assert np.allclose(span_average(values, durations), span_means(values.tolist(), durations), atol=1e-12)

    def test_coverage_error(self):
        with pytest.raises(ValidationError):
            span_average(np.zeros(4), [1, 2])


def test_extract_features_sections_round_trip(tmp_path):
    from thaifront.corpus_io import read_feature_record, write_feature_record

    feats = extract_features(sine(180, 0.5), n_phonemes=5)
    write_feature_record(tmp_path / "x.feat", feats.sections())
    back = UtteranceFeatures.from_sections(read_feature_record(tmp_path / "x.feat"))
    assert np.array_equal(back.mel.frames, feats.mel.frames)
    assert back.mel.config == feats.mel.config
    assert np.array_equal(back.durations, feats.durations)
    assert back.durations.sum() == feats.mel.n_frames
