"""Component ablations on planted synthetic corpora.

Each ablation returns the metric with the component on and off. Only the
direction of the change is meaningful; the corpora are tiny and synthetic.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Mapping, Sequence

from .corpus_io import DEFAULT_PAUSE_TAG, PauseAnnotatedSentence, PhonemeToneSequence, parse_pause_annotation
from .errors import ThaiFrontError
from .pauses import corpus_pause_f1, train_pause_model
from .phonology import phoneme_error_rate
from .pipeline import stage_g2p, stage_pauses, stage_segment
from .segmentation import TrieIndex, segment
from .synthetic import planted_pause_corpus


@dataclass(frozen=True)
class AblationResult:
    component: str
    metric: str
    enabled: float
    disabled: float
    baseline: float | None = None

    def line(self) -> str:
        base = "" if self.baseline is None else f" baseline={self.baseline:.4f}"
        return f"{self.component}: {self.metric} enabled={self.enabled:.4f} disabled={self.disabled:.4f}{base}"


def _tagged_f1(sentences: Sequence[PauseAnnotatedSentence], model, trie: TrieIndex) -> float:
    preds = [parse_pause_annotation(stage_pauses(s.raw_text, model, trie, DEFAULT_PAUSE_TAG)) for s in sentences]
    return corpus_pause_f1(list(sentences), preds)[2]


def pause_ablation(words: Sequence[str], trigger: str, trie: TrieIndex, n_train: int = 200,
                   n_test: int = 100, seed: int = 0) -> AblationResult:
    """Pause-gap F1 on held-out planted sentences with and without the pause model.

    The baseline predicts no pauses at all.
    """
    train = planted_pause_corpus(words, trigger, n_train, seed=seed, trie=trie)
    test = planted_pause_corpus(words, trigger, n_test, seed=seed + 1, trie=trie).sentences
    model = train_pause_model(list(train.sentences), trie)
    baseline = corpus_pause_f1(list(test), [PauseAnnotatedSentence(s.raw_text) for s in test])[2]
    return AblationResult("pause_model", "pause_gap_f1", _tagged_f1(test, model, trie),
                          _tagged_f1(test, None, trie), baseline)


def exception_sentences(gold: Mapping[str, PhonemeToneSequence], planted: Sequence[str], trie: TrieIndex,
                        n: int, seed: int = 0, min_len: int = 2, max_len: int = 5) -> list[list[str]]:
    """Word lists that each contain one planted word and segment back to themselves."""
    rng = random.Random(seed)
    pool = sorted(w for w in gold if trie.contains(w))
    planted = sorted(planted)
    out = []
    while len(out) < n:
        words = [rng.choice(pool) for _ in range(rng.randint(min_len, max_len) - 1)]
        words.insert(rng.randint(0, len(words)), rng.choice(planted))
        if segment("".join(words), trie).tokens == tuple(words):
            out.append(words)
    return out


def _pronounce(text: str, trie: TrieIndex, exceptions) -> PhonemeToneSequence | None:
    try:
        utt = stage_g2p(stage_segment(text, trie, DEFAULT_PAUSE_TAG), DEFAULT_PAUSE_TAG, exceptions)
    except ThaiFrontError:
        return None
    return PhonemeToneSequence(tuple(s for s in utt.items if s is not None))


def exception_ablation(gold: Mapping[str, PhonemeToneSequence], exceptions: Mapping[str, PhonemeToneSequence],
                       trie: TrieIndex, n: int = 100, seed: int = 0) -> AblationResult:
    """Sentence-level phoneme error rate with and without the exception dictionary.

    A sentence the rules cannot pronounce counts as fully deleted. The
    annotation fallback stays off so that it cannot mask the ablation.
    """
    sents = exception_sentences(gold, list(exceptions), trie, n, seed)
    refs = [PhonemeToneSequence(tuple(s for w in words for s in gold[w].syllables)) for words in sents]
    texts = ["".join(words) for words in sents]
    on = phoneme_error_rate(refs, [_pronounce(t, trie, exceptions) for t in texts])
    off = phoneme_error_rate(refs, [_pronounce(t, trie, {}) for t in texts])
    return AblationResult("exceptions", "phoneme_error_rate", on, off)
