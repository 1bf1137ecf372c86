"""Objective metrics: WER/CER, STOI, cosine similarity and segmentation F1."""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd
from typing import Hashable, Sequence

import numpy as np
from scipy.signal import resample_poly

from .audio import Waveform
from .errors import ValidationError
from .segmentation import Segmentation, grapheme_clusters


@dataclass(frozen=True)
class EditOps:
    substitutions: int = 0
    insertions: int = 0
    deletions: int = 0

    @property
    def distance(self) -> int:
        return self.substitutions + self.insertions + self.deletions


def edit_ops(ref: Sequence[Hashable], hyp: Sequence[Hashable]) -> EditOps:
    """Levenshtein alignment counts; ties prefer match/substitution, then deletion."""
    n, m = len(ref), len(hyp)
    d = np.zeros((n + 1, m + 1), dtype=np.int64)
    d[:, 0] = np.arange(n + 1)
    d[0, :] = np.arange(m + 1)
    for i in range(1, n + 1):
        ri = ref[i - 1]
        for j in range(1, m + 1):
            sub = d[i - 1, j - 1] + (ri != hyp[j - 1])
            d[i, j] = min(sub, d[i - 1, j] + 1, d[i, j - 1] + 1)
    s = ins = dels = 0
    i, j = n, m
    while i > 0 or j > 0:
        if i > 0 and j > 0 and d[i, j] == d[i - 1, j - 1] + (ref[i - 1] != hyp[j - 1]):
            s += ref[i - 1] != hyp[j - 1]
            i, j = i - 1, j - 1
        elif i > 0 and d[i, j] == d[i - 1, j] + 1:
            dels += 1
            i -= 1
        else:
            ins += 1
            j -= 1
    return EditOps(int(s), ins, dels)


def wer(ref_words: Sequence[Hashable], hyp_words: Sequence[Hashable]) -> tuple[float, EditOps]:
    if len(ref_words) == 0:
        raise ValidationError("empty reference")
    ops = edit_ops(list(ref_words), list(hyp_words))
    return ops.distance / len(ref_words), ops


def cer(ref: str, hyp: str) -> float:
    """Character error rate over extended grapheme clusters."""
    rate, _ = wer(grapheme_clusters(ref), grapheme_clusters(hyp))
    return rate


def corpus_error_rate(pairs: Sequence[tuple[Sequence, Sequence]]) -> float:
    """Total edits over total reference length, summed in input order."""
    errors = total = 0
    for ref, hyp in pairs:
        errors += edit_ops(list(ref), list(hyp)).distance
        total += len(ref)
    if total == 0:
        raise ValidationError("empty reference corpus")
    return errors / total


# -- STOI ---------------------------------------------------------------------


@dataclass(frozen=True)
class StoiConfig:
    fs: int = 10000
    frame_len: int = 256  # 25.6 ms at 10 kHz
    n_fft: int = 512
    n_bands: int = 15
    min_freq: float = 150.0
    segment_frames: int = 30  # 384 ms
    beta_db: float = -15.0
    dyn_range_db: float = 40.0

    def __post_init__(self):
        top = self.min_freq * 2 ** ((2 * (self.n_bands - 1) + 1) / 6)
        if min(self.fs, self.frame_len, self.n_fft, self.n_bands, self.segment_frames) <= 0:
            raise ValidationError("STOI constants must be positive")
        if top > self.fs / 2:
            raise ValidationError("highest one-third octave band exceeds Nyquist")


_EPS = np.finfo(np.float64).eps


def third_octave_bands(cfg: StoiConfig) -> np.ndarray:
    """Binary (bands x bins) matrix selecting FFT bins for each one-third octave band."""
    f = np.linspace(0, cfg.fs, cfg.n_fft + 1)[: cfg.n_fft // 2 + 1]
    k = np.arange(cfg.n_bands)
    lo = cfg.min_freq * 2.0 ** ((2 * k - 1) / 6)
    hi = cfg.min_freq * 2.0 ** ((2 * k + 1) / 6)
    obm = np.zeros((cfg.n_bands, f.size))
    for i in range(cfg.n_bands):
        a = int(np.argmin((f - lo[i]) ** 2))
        b = int(np.argmin((f - hi[i]) ** 2))
        obm[i, a:b] = 1.0
    return obm


def _hann(n: int) -> np.ndarray:
    return np.hanning(n + 2)[1:-1]


def _frames(x: np.ndarray, n: int, hop: int) -> np.ndarray:
    starts = range(0, len(x) - n, hop)
    w = _hann(n)
    return np.array([w * x[s:s + n] for s in starts])


def _overlap_add(frames: np.ndarray, hop: int) -> np.ndarray:
    n_frames, n = frames.shape
    out = np.zeros((n_frames - 1) * hop + n)
    for i, fr in enumerate(frames):
        out[i * hop:i * hop + n] += fr
    return out


def _remove_silent_frames(x, y, cfg: StoiConfig):
    hop = cfg.frame_len // 2
    xf = _frames(x, cfg.frame_len, hop)
    yf = _frames(y, cfg.frame_len, hop)
    norms = np.linalg.norm(xf, axis=1)
    if not np.any(norms > 0):
        raise ValidationError("clean signal is silent")
    energies = 20 * np.log10(norms + _EPS)
    keep = energies > np.max(energies) - cfg.dyn_range_db
    return _overlap_add(xf[keep], hop), _overlap_add(yf[keep], hop)


def _band_envelopes(x: np.ndarray, cfg: StoiConfig, obm: np.ndarray) -> np.ndarray:
    frames = _frames(x, cfg.frame_len, cfg.frame_len // 2)
    spec = np.fft.rfft(frames, n=cfg.n_fft, axis=1)
    return np.sqrt(obm @ (np.abs(spec) ** 2).T)  # bands x frames


def _resample(x: np.ndarray, sr: int, target: int) -> np.ndarray:
    if sr == target:
        return x
    g = gcd(sr, target)
    return resample_poly(x, target // g, sr // g)


def stoi(clean: Waveform, processed: Waveform, cfg: StoiConfig | None = None) -> float:
    """Short-time objective intelligibility of ``processed`` against ``clean``.

    Signals are resampled to 10 kHz, frames more than 40 dB below the
    loudest clean frame are dropped, and the score is the mean correlation
    between 384 ms one-third octave envelopes after per-band normalisation
    and clipping of the processed envelope.
    """
    cfg = cfg or StoiConfig()
    if clean.sample_rate != processed.sample_rate:
        raise ValidationError("sample rates differ")
    if len(clean) != len(processed):
        raise ValidationError("signal lengths differ")
    if clean.sample_rate < 10000:
        raise ValidationError("STOI needs a sample rate of at least 10 kHz")
    x = _resample(clean.samples, clean.sample_rate, cfg.fs)
    y = _resample(processed.samples, processed.sample_rate, cfg.fs)
    if len(x) <= cfg.frame_len:
        raise ValidationError("signal too short for STOI")
    x, y = _remove_silent_frames(x, y, cfg)
    obm = third_octave_bands(cfg)
    X = _band_envelopes(x, cfg, obm) if len(x) > cfg.frame_len else np.zeros((cfg.n_bands, 0))
    Y = _band_envelopes(y, cfg, obm) if len(y) > cfg.frame_len else np.zeros((cfg.n_bands, 0))
    N = cfg.segment_frames
    if X.shape[1] < N:
        raise ValidationError(f"signal too short for STOI: {X.shape[1]} frames < {N}")
    clip = 10 ** (-cfg.beta_db / 20)
    scores = []
    for m in range(N, X.shape[1] + 1):
        xs = X[:, m - N:m]
        ys = Y[:, m - N:m]
        alpha = np.linalg.norm(xs, axis=1, keepdims=True) / (np.linalg.norm(ys, axis=1, keepdims=True) + _EPS)
        yn = np.minimum(ys * alpha, xs * (1 + clip))
        xc = xs - xs.mean(axis=1, keepdims=True)
        yc = yn - yn.mean(axis=1, keepdims=True)
        num = np.sum(xc * yc, axis=1)
        den = np.linalg.norm(xc, axis=1) * np.linalg.norm(yc, axis=1) + _EPS
        scores.append(num / den)
    return float(np.mean(scores))


# -- similarity and segmentation ----------------------------------------------


def cosine_sim(a, b) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ValidationError("vectors must be one-dimensional with equal length")
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        raise ValidationError("cosine similarity of a zero vector")
    return float(np.clip(np.dot(a, b) / (na * nb), -1.0, 1.0))


def boundaries(tokens: Sequence[str]) -> set[int]:
    out, pos = set(), 0
    for tok in tokens[:-1]:
        pos += len(tok)
        out.add(pos)
    return out


def segmentation_f1(gold: Segmentation | Sequence[str], pred: Segmentation | Sequence[str]) -> tuple[float, float, float]:
    g = tuple(gold.tokens if isinstance(gold, Segmentation) else gold)
    p = tuple(pred.tokens if isinstance(pred, Segmentation) else pred)
    if "".join(g) != "".join(p):
        raise ValidationError("segmentations cover different text")
    gb, pb = boundaries(g), boundaries(p)
    if not gb and not pb:
        return 1.0, 1.0, 1.0
    tp = len(gb & pb)
    prec = tp / len(pb) if pb else 0.0
    rec = tp / len(gb) if gb else 0.0
    f = 2 * prec * rec / (prec + rec) if prec + rec else 0.0
    return prec, rec, f
