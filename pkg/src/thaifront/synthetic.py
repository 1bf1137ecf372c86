"""Seeded synthetic corpora with planted rules, for ablations and golden files."""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .audio import Waveform
from .corpus_io import Lexicon, PauseAnnotatedSentence
from .prosody import PhonemeTargets, ProsodyPredictor, _forward, contextual_representation, model_inputs
from .segmentation import TrieIndex, build_trie, segment


@dataclass(frozen=True)
class PlantedPauseCorpus:
    sentences: tuple[PauseAnnotatedSentence, ...]
    tokens: tuple[tuple[str, ...], ...]
    trigger: str


def _sample_tokens(rng: random.Random, words: Sequence[str], trigger: str, lo: int, hi: int,
                   trigger_rate: float) -> list[str]:
    n = rng.randint(lo, hi)
    out = []
    for _ in range(n):
        out.append(trigger if rng.random() < trigger_rate else rng.choice(words))
    return out


def planted_pause_corpus(words: Sequence[str], trigger: str, n: int, seed: int = 0,
                         trie: TrieIndex | None = None, min_len: int = 3, max_len: int = 7,
                         trigger_rate: float = 0.25) -> PlantedPauseCorpus:
    """Sentences of lexicon words with a pause after every non-final ``trigger``.

    Sentences whose concatenation the segmenter would split differently
    from the sampled tokens are redrawn, so gold pause offsets always fall
    on segmenter boundaries.
    """
    words = sorted(w for w in set(words) if w != trigger)
    trie = trie or build_trie(Lexicon({w: 1 for w in [*words, trigger]}))
    rng = random.Random(seed)
    sents, toks = [], []
    while len(sents) < n:
        tokens = _sample_tokens(rng, words, trigger, min_len, max_len, trigger_rate)
        text = "".join(tokens)
        if segment(text, trie).tokens != tuple(tokens):
            continue
        offsets, pos = [], 0
        for tok in tokens[:-1]:
            pos += len(tok)
            if tok == trigger:
                offsets.append(pos)
        sents.append(PauseAnnotatedSentence(text, tuple(offsets)))
        toks.append(tuple(tokens))
    return PlantedPauseCorpus(tuple(sents), tuple(toks), trigger)


def word_sentences(words: Sequence[str], n: int, seed: int = 0, min_len: int = 1, max_len: int = 6) -> list[list[str]]:
    rng = random.Random(seed)
    words = sorted(set(words))
    return [[rng.choice(words) for _ in range(rng.randint(min_len, max_len))] for _ in range(n)]


@dataclass(frozen=True)
class PlantedProsody:
    """Inputs and targets generated by a known ``teacher`` predictor."""

    X: np.ndarray
    targets: PhonemeTargets
    teacher: ProsodyPredictor


def planted_prosody(vocab_size: int = 12, n_seqs: int = 20, seq_len: int = 8, style_dim: int = 4,
                    window: int = 2, seed: int = 0, scale: float = 0.5) -> PlantedProsody:
    """Targets are the teacher's own outputs, so the optimum loss is zero."""
    rng = np.random.default_rng(seed)
    teacher = ProsodyPredictor.random(vocab_size, window, style_dim, seed=seed + 1, scale=scale)
    rows = []
    for _ in range(n_seqs):
        ids = rng.integers(0, vocab_size, seq_len)
        style = rng.standard_normal(style_dim)
        rows.append(model_inputs(contextual_representation(ids, vocab_size, window), style))
    X = np.vstack(rows)
    _, d, p, e = _forward(teacher.params, X)
    return PlantedProsody(X, PhonemeTargets(d, p, e), teacher)


def modulated_noise(seconds: float = 3.0, sample_rate: int = 16000, seed: int = 0, rate_hz: float = 4.0,
                    amp: float = 0.3) -> Waveform:
    """Gaussian noise under a syllable-rate sinusoidal envelope: a crude speech stand-in."""
    rng = np.random.default_rng(seed)
    t = np.arange(int(seconds * sample_rate)) / sample_rate
    env = 0.5 * (1 + np.sin(2 * np.pi * rate_hz * t))
    return Waveform(np.clip(amp * env * rng.standard_normal(t.size), -1, 1), sample_rate)


def add_noise(clean: Waveform, snr_db: float, seed: int = 1) -> Waveform:
    """White noise at the requested SNR, peak-normalised only if it would clip."""
    rng = np.random.default_rng(seed)
    n = rng.standard_normal(len(clean))
    x = clean.samples
    y = x + np.sqrt(np.mean(x ** 2) / np.mean(n ** 2) / 10 ** (snr_db / 10)) * n
    peak = np.max(np.abs(y))
    return Waveform(y / peak if peak > 1 else y, clean.sample_rate)
