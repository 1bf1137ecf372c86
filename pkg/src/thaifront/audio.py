"""Desk-scale acoustic features: log-mel, pitch, energy, durations, style.

Frames never use padding: frame ``i`` covers samples
``[i * hop, i * hop + win)`` and a signal of ``n`` samples has
``1 + (n - win) // hop`` frames. Mel, pitch and energy share this grid.
"""

from __future__ import annotations

import wave
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.signal import get_window

from .errors import ValidationError

LOG_FLOOR = 1e-5


@dataclass(frozen=True)
class Waveform:
    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=np.float64)
        if s.ndim != 1:
            raise ValidationError("waveform must be one-dimensional (mono)")
        if self.sample_rate <= 0:
            raise ValidationError("sample_rate must be positive")
        if not np.all(np.isfinite(s)):
            raise ValidationError("waveform contains non-finite samples")
        if s.size and np.max(np.abs(s)) > 1.0:
            raise ValidationError("samples must lie in [-1, 1]")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    def __len__(self):
        return self.samples.size

    def scaled(self, k: float) -> "Waveform":
        return Waveform(self.samples * k, self.sample_rate)


@dataclass(frozen=True)
class MelConfig:
    sample_rate: int = 24000
    fft_size: int = 1024
    hop: int = 256
    win: int = 1024
    n_mels: int = 80
    fmin: float = 0.0
    fmax: float = 12000.0

    def __post_init__(self):
        if self.win > self.fft_size:
            raise ValidationError("win must not exceed fft_size")
        if min(self.fft_size, self.hop, self.win, self.n_mels) <= 0:
            raise ValidationError("fft_size, hop, win and n_mels must be positive")
        if not 0 <= self.fmin < self.fmax <= self.sample_rate / 2:
            raise ValidationError("need 0 <= fmin < fmax <= Nyquist")

    def n_frames(self, n_samples: int) -> int:
        if n_samples < self.win:
            return 0
        return 1 + (n_samples - self.win) // self.hop


@dataclass(frozen=True)
class PitchConfig:
    fmin: float = 60.0
    fmax: float = 400.0
    voicing_threshold: float = 0.5
    silence_rms: float = 1e-4


@dataclass(frozen=True)
class MelFrames:
    frames: np.ndarray
    config: MelConfig

    @property
    def n_frames(self) -> int:
        return self.frames.shape[0]

    def linear(self) -> np.ndarray:
        return np.exp(self.frames)


@dataclass(frozen=True)
class ProsodyFeatures:
    durations: np.ndarray
    pitch: np.ndarray
    energy: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.durations, dtype=np.int64)
        p = np.asarray(self.pitch, dtype=np.float64)
        e = np.asarray(self.energy, dtype=np.float64)
        if p.shape != e.shape:
            raise ValidationError("pitch and energy must share the frame grid")
        if d.sum() != p.shape[0]:
            raise ValidationError(f"durations sum to {d.sum()}, expected {p.shape[0]} frames")
        if np.any(d < 0) or np.any(p < 0) or np.any(e < 0):
            raise ValidationError("durations, pitch and energy must be non-negative")
        object.__setattr__(self, "durations", d)
        object.__setattr__(self, "pitch", p)
        object.__setattr__(self, "energy", e)


# -- WAV I/O ------------------------------------------------------------------


def read_wav(path) -> Waveform:
    """Read a mono 16-bit PCM WAV file."""
    with wave.open(str(path), "rb") as f:
        if f.getnchannels() != 1:
            raise ValidationError(f"{path}: {f.getnchannels()} channels, only mono is supported")
        if f.getsampwidth() != 2:
            raise ValidationError(f"{path}: only 16-bit PCM is supported")
        sr = f.getframerate()
        raw = f.readframes(f.getnframes())
    pcm = np.frombuffer(raw, dtype="<i2").astype(np.float64) / 32768.0
    return Waveform(pcm, sr)


def write_wav(path, w: Waveform) -> None:
    pcm = np.clip(np.round(w.samples * 32767.0), -32768, 32767).astype("<i2")
    with wave.open(str(path), "wb") as f:
        f.setnchannels(1)
        f.setsampwidth(2)
        f.setframerate(w.sample_rate)
        f.writeframes(pcm.tobytes())


# -- spectral features --------------------------------------------------------


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def mel_filterbank(cfg: MelConfig) -> np.ndarray:
    """Triangular filters on the HTK mel scale, each row normalised to sum 1.

    A filter too narrow to contain any FFT bin centre falls back to the bin
    nearest its centre, so no row is all zero.
    """
    n_bins = cfg.fft_size // 2 + 1
    freqs = np.arange(n_bins) * cfg.sample_rate / cfg.fft_size
    edges = mel_to_hz(np.linspace(hz_to_mel(cfg.fmin), hz_to_mel(cfg.fmax), cfg.n_mels + 2))
    fb = np.zeros((cfg.n_mels, n_bins))
    for m in range(cfg.n_mels):
        lo, mid, hi = edges[m], edges[m + 1], edges[m + 2]
        up = (freqs - lo) / (mid - lo)
        down = (hi - freqs) / (hi - mid)
        fb[m] = np.maximum(0.0, np.minimum(up, down))
        if fb[m].sum() <= 0.0:
            fb[m, int(np.argmin(np.abs(freqs - mid)))] = 1.0
    return fb / fb.sum(axis=1, keepdims=True)


def frame_signal(x: np.ndarray, win: int, hop: int) -> np.ndarray:
    n = 1 + (len(x) - win) // hop
    idx = np.arange(win)[None, :] + hop * np.arange(n)[:, None]
    return x[idx]


def stft_magnitude(w: Waveform, cfg: MelConfig) -> np.ndarray:
    if len(w) < cfg.win:
        raise ValidationError(f"signal of {len(w)} samples is shorter than one window ({cfg.win})")
    frames = frame_signal(w.samples, cfg.win, cfg.hop) * get_window("hann", cfg.win, fftbins=True)
    return np.abs(np.fft.rfft(frames, n=cfg.fft_size, axis=1))


def mel_spectrogram(w: Waveform, cfg: MelConfig | None = None) -> MelFrames:
    cfg = cfg or MelConfig(sample_rate=w.sample_rate)
    if cfg.sample_rate != w.sample_rate:
        raise ValidationError(f"config expects {cfg.sample_rate} Hz, waveform is {w.sample_rate} Hz")
    mag = stft_magnitude(w, cfg)
    mel = mag @ mel_filterbank(cfg).T
    return MelFrames(np.log(np.maximum(mel, LOG_FLOOR)), cfg)


def extract_energy(mel: MelFrames) -> np.ndarray:
    """Per-frame RMS over mel bands of the linear (floored) mel energies."""
    lin = mel.linear()
    return np.sqrt(np.mean(lin * lin, axis=1))


def _nccf(frames: np.ndarray, max_lag: int) -> np.ndarray:
    """Normalised cross-correlation r[f, lag] for lags 0..max_lag."""
    n = frames.shape[1]
    size = 1 << int(np.ceil(np.log2(2 * n)))
    spec = np.fft.rfft(frames, n=size, axis=1)
    ac = np.fft.irfft(spec * np.conj(spec), n=size, axis=1)[:, :max_lag + 1]
    sq = frames * frames
    csum = np.concatenate([np.zeros((frames.shape[0], 1)), np.cumsum(sq, axis=1)], axis=1)
    lags = np.arange(max_lag + 1)
    e_head = csum[:, n - lags]  # sum x[0 : n-lag]^2
    e_tail = csum[:, n:n + 1] - csum[:, lags]  # sum x[lag : n]^2
    denom = np.sqrt(np.maximum(e_head * e_tail, 0.0))
    with np.errstate(invalid="ignore", divide="ignore"):
        r = np.where(denom > 0, ac / denom, 0.0)
    return r


def extract_pitch(w: Waveform, cfg: MelConfig | None = None, pcfg: PitchConfig | None = None) -> np.ndarray:
    """Per-frame f0 in Hz by normalised autocorrelation; 0 marks unvoiced frames.

    The first local maximum within 90% of the best peak in
    [fmin, fmax] is taken, which avoids sub-octave picks on periodic input.
    """
    cfg = cfg or MelConfig(sample_rate=w.sample_rate)
    pcfg = pcfg or PitchConfig()
    if w.sample_rate < 8000:
        raise ValidationError("pitch extraction needs at least 8 kHz")
    if len(w) < cfg.win:
        raise ValidationError(f"signal of {len(w)} samples is shorter than one window ({cfg.win})")
    sr = w.sample_rate
    min_lag = max(1, int(np.floor(sr / pcfg.fmax)))
    max_lag = min(cfg.win - 2, int(np.ceil(sr / pcfg.fmin)))
    frames = frame_signal(w.samples, cfg.win, cfg.hop)
    frames = frames - frames.mean(axis=1, keepdims=True)
    r = _nccf(frames, max_lag + 1)
    rms = np.sqrt(np.mean(frames * frames, axis=1))
    f0 = np.zeros(frames.shape[0])
    for i in range(frames.shape[0]):
        if rms[i] < pcfg.silence_rms:
            continue
        seg = r[i]
        peaks = [k for k in range(min_lag, max_lag + 1) if seg[k] >= seg[k - 1] and seg[k] >= seg[k + 1]]
        if not peaks:
            continue
        best = max(seg[k] for k in peaks)
        if best < pcfg.voicing_threshold:
            continue
        k = next(k for k in peaks if seg[k] >= 0.9 * best)
        a, b, c = seg[k - 1], seg[k], seg[k + 1]
        denom = a - 2 * b + c
        shift = 0.5 * (a - c) / denom if denom < 0 else 0.0
        f = sr / (k + shift)
        if pcfg.fmin <= f <= pcfg.fmax:
            f0[i] = f
    return f0


def phoneme_durations(n_phonemes: int, n_frames: int,
                      alignment: Sequence[tuple[str, int]] | Sequence[int] | None = None) -> np.ndarray:
    """Frames per phoneme: taken from an alignment or split evenly.

    The even split gives earlier phonemes the remainder: (4, 10) -> [3, 3, 2, 2].
    """
    if n_phonemes < 1:
        raise ValidationError("need at least one phoneme")
    if alignment is not None:
        counts = [a[1] if isinstance(a, tuple) else a for a in alignment]
        if len(counts) != n_phonemes:
            raise ValidationError(f"alignment has {len(counts)} phonemes, expected {n_phonemes}")
        if sum(counts) != n_frames:
            raise ValidationError(f"alignment covers {sum(counts)} frames, expected {n_frames}")
        if any(c < 0 for c in counts):
            raise ValidationError("negative frame count in alignment")
        return np.asarray(counts, dtype=np.int64)
    if n_frames < n_phonemes:
        raise ValidationError(f"{n_frames} frames cannot cover {n_phonemes} phonemes")
    q, r = divmod(n_frames, n_phonemes)
    return np.asarray([q + 1] * r + [q] * (n_phonemes - r), dtype=np.int64)


_STYLE_SEED = 20250301


def style_projection(in_dim: int, dim: int) -> np.ndarray:
    rng = np.random.default_rng(_STYLE_SEED + in_dim)
    return rng.standard_normal((dim, in_dim)) / np.sqrt(dim)


def style_vector(mel: MelFrames, dim: int = 32) -> np.ndarray:
    """Per-band mean and std of the log-mel, through a fixed random projection."""
    if mel.n_frames < 2:
        raise ValidationError("style vector needs at least two frames")
    stats = np.concatenate([mel.frames.mean(axis=0), mel.frames.std(axis=0)])
    return style_projection(stats.size, dim) @ stats


def span_average(values: np.ndarray, durations: Sequence[int]) -> np.ndarray:
    """Mean of frame values over each phoneme's duration span (0 for empty spans)."""
    values = np.asarray(values, dtype=np.float64)
    ends = np.cumsum(durations)
    if ends[-1] != values.shape[0]:
        raise ValidationError("durations do not cover the frame grid")
    out = np.zeros(len(durations))
    start = 0
    for i, end in enumerate(ends):
        if end > start:
            out[i] = values[start:end].mean()
        start = end
    return out


@dataclass
class UtteranceFeatures:
    mel: MelFrames
    pitch: np.ndarray
    energy: np.ndarray
    style: np.ndarray
    durations: np.ndarray | None = None
    extra: dict = field(default_factory=dict)

    def sections(self) -> dict[str, np.ndarray]:
        c = self.mel.config
        out = {
            "mel": self.mel.frames,
            "pitch": self.pitch,
            "energy": self.energy,
            "durations": self.durations if self.durations is not None else np.zeros(0),
            "style": self.style,
            "mel_config": np.array([c.sample_rate, c.fft_size, c.hop, c.win, c.n_mels, c.fmin, c.fmax], dtype=np.float64),
        }
        out.update(self.extra)
        return out

    @classmethod
    def from_sections(cls, sec: dict[str, np.ndarray]) -> "UtteranceFeatures":
        sr, fft, hop, win, n_mels, fmin, fmax = sec["mel_config"].tolist()
        cfg = MelConfig(int(sr), int(fft), int(hop), int(win), int(n_mels), fmin, fmax)
        dur = sec["durations"].astype(np.int64) if sec["durations"].size else None
        known = {"mel", "pitch", "energy", "durations", "style", "mel_config"}
        extra = {k: v for k, v in sec.items() if k not in known}
        return cls(MelFrames(sec["mel"], cfg), sec["pitch"], sec["energy"], sec["style"], dur, extra)


def extract_features(w: Waveform, cfg: MelConfig | None = None, pcfg: PitchConfig | None = None,
                     style_dim: int = 32, n_phonemes: int | None = None, alignment=None) -> UtteranceFeatures:
    cfg = cfg or MelConfig(sample_rate=w.sample_rate)
    mel = mel_spectrogram(w, cfg)
    pitch = extract_pitch(w, cfg, pcfg)
    energy = extract_energy(mel)
    style = style_vector(mel, style_dim)
    durations = None
    if alignment is not None:
        durations = phoneme_durations(len(alignment), mel.n_frames, alignment)
    elif n_phonemes is not None:
        durations = phoneme_durations(n_phonemes, mel.n_frames)
    return UtteranceFeatures(mel, pitch, energy, style, durations)


def config_dict(cfg: MelConfig) -> dict:
    return asdict(cfg)
