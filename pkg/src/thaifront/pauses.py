"""Prosodic pause insertion for unpunctuated Thai text.

A pause model scores every gap between adjacent tokens of a segmented
sentence; gaps scoring at or above the model threshold get a pause tag.
Anything with a ``threshold`` attribute and a ``score_gaps(tokens,
oov_flags)`` method can be passed to :func:`predict_pauses`, so a neural
predictor can replace the count-based :class:`PauseModel` below.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Protocol, Sequence

from .corpus_io import PauseAnnotatedSentence, nfc
from .errors import ParseError, ValidationError
from .segmentation import Segmentation, TrieIndex, segment

FORMAT_NAME = "thaifront-pause-model"
FORMAT_VERSION = 1

OOV_CLASS = "<OOV>"
BOS = "<s>"
EOS = "</s>"
_TOK_SEP = "\x1f"
_SIDE_SEP = "\x1e"


class GapScorer(Protocol):
    threshold: float

    def score_gaps(self, tokens: Sequence[str], oov_flags: Sequence[bool]) -> list[float]: ...


def _norm_tokens(tokens, oov_flags):
    return [OOV_CLASS if oov else t for t, oov in zip(tokens, oov_flags)]


def gap_signatures(tokens: Sequence[str], oov_flags: Sequence[bool], gap: int, window: int) -> list[str]:
    """Back-off chain of context signatures for the gap before ``tokens[gap]``.

    Most specific first: ``window`` tokens on each side, then narrower
    symmetric windows, then the left token alone, then the right token alone.
    """
    toks = [BOS] * window + _norm_tokens(tokens, oov_flags) + [EOS] * window
    g = gap + window
    chain = []
    for k in range(window, 0, -1):
        left = _TOK_SEP.join(toks[g - k:g])
        right = _TOK_SEP.join(toks[g:g + k])
        chain.append(f"B{k}{_TOK_SEP}{left}{_SIDE_SEP}{right}")
    chain.append(left_signature(toks[g - 1]))
    chain.append(f"R1{_TOK_SEP}{toks[g]}")
    return chain


def left_signature(token: str) -> str:
    return f"L1{_TOK_SEP}{token}"


def right_signature(token: str) -> str:
    return f"R1{_TOK_SEP}{token}"


@dataclass(frozen=True)
class PauseModel:
    """Smoothed pause probabilities per context signature.

    ``score = (pauses + prior) / (count + 1)``: one pseudo-observation at
    the corpus-wide pause rate, so an unseen signature scores the prior.
    """

    window_size: int = 2
    boundary_scores: Mapping[str, float] = field(default_factory=dict)
    threshold: float = 0.5
    prior: float = 0.0

    def __post_init__(self):
        if self.window_size < 1:
            raise ValidationError("window_size must be >= 1")
        if not 0.0 <= self.threshold <= 1.0:
            raise ValidationError(f"threshold {self.threshold} outside [0, 1]")
        if not 0.0 <= self.prior <= 1.0:
            raise ValidationError(f"prior {self.prior} outside [0, 1]")
        for key, p in self.boundary_scores.items():
            if not 0.0 <= p <= 1.0:
                raise ValidationError(f"score {p} for {key!r} outside [0, 1]")
        object.__setattr__(self, "boundary_scores", dict(self.boundary_scores))

    def with_threshold(self, threshold: float) -> "PauseModel":
        # thresholds above 1 are allowed here so callers can switch pauses off
        m = object.__new__(PauseModel)
        for name in ("window_size", "boundary_scores", "prior"):
            object.__setattr__(m, name, getattr(self, name))
        object.__setattr__(m, "threshold", float(threshold))
        return m

    def score_gap(self, tokens, oov_flags, gap: int) -> float:
        for sig in gap_signatures(tokens, oov_flags, gap, self.window_size):
            score = self.boundary_scores.get(sig)
            if score is not None:
                return score
        return self.prior

    def score_gaps(self, tokens, oov_flags) -> list[float]:
        return [self.score_gap(tokens, oov_flags, g) for g in range(1, len(tokens))]


def _tokens_with_forced_cuts(sent: PauseAnnotatedSentence, trie: TrieIndex) -> tuple[list[str], list[bool], set[int]]:
    """Segment the pause-delimited chunks separately so every pause sits on a gap."""
    tokens, flags, pause_gaps = [], [], set()
    prev = 0
    cuts = list(sent.pause_offsets) + [len(sent.raw_text)]
    for cut in cuts:
        seg = segment(sent.raw_text[prev:cut], trie)
        tokens.extend(seg.tokens)
        flags.extend(seg.oov_flags)
        if cut < len(sent.raw_text):
            pause_gaps.add(len(tokens))
        prev = cut
    return tokens, flags, pause_gaps


def train_pause_model(corpus: Sequence[PauseAnnotatedSentence], lexicon_trie: TrieIndex,
                      window: int = 2, threshold: float = 0.5) -> PauseModel:
    if not corpus:
        raise ValidationError("empty pause corpus")
    if window < 1:
        raise ValidationError("window must be >= 1")
    counts: dict[str, list[int]] = {}
    n_gaps = n_pauses = 0
    for sent in corpus:
        tokens, flags, pause_gaps = _tokens_with_forced_cuts(sent, lexicon_trie)
        for gap in range(1, len(tokens)):
            is_pause = gap in pause_gaps
            n_gaps += 1
            n_pauses += is_pause
            for sig in gap_signatures(tokens, flags, gap, window):
                c = counts.setdefault(sig, [0, 0])
                c[0] += is_pause
                c[1] += 1
    prior = n_pauses / n_gaps if n_gaps else 0.0
    scores = {sig: (p + prior) / (n + 1) for sig, (p, n) in counts.items()}
    return PauseModel(window, scores, threshold, prior)


def predict_pauses(text: str, model: GapScorer, trie: TrieIndex) -> PauseAnnotatedSentence:
    if not text:
        return PauseAnnotatedSentence("", ())
    seg = segment(text, trie)
    return pauses_for_segmentation(seg, model)


def pauses_for_segmentation(seg: Segmentation, model: GapScorer) -> PauseAnnotatedSentence:
    scores = model.score_gaps(seg.tokens, seg.oov_flags)
    offsets = []
    pos = 0
    for gap, tok in enumerate(seg.tokens[:-1], 1):
        pos += len(tok)
        if scores[gap - 1] >= model.threshold:
            offsets.append(pos)
    return PauseAnnotatedSentence(seg.text, tuple(offsets))


def pause_gap_f1(gold: PauseAnnotatedSentence, pred: PauseAnnotatedSentence) -> tuple[float, float, float]:
    if gold.raw_text != pred.raw_text:
        raise ValidationError("gold and predicted sentences have different raw text")
    return _prf(set(gold.pause_offsets), set(pred.pause_offsets))


def _prf(gold: set, pred: set) -> tuple[float, float, float]:
    if not gold and not pred:
        return 1.0, 1.0, 1.0
    tp = len(gold & pred)
    return _prf_counts(tp, len(pred), len(gold))


def _prf_counts(tp: int, n_pred: int, n_gold: int) -> tuple[float, float, float]:
    if n_pred == 0 and n_gold == 0:
        return 1.0, 1.0, 1.0
    p = tp / n_pred if n_pred else 0.0
    r = tp / n_gold if n_gold else 0.0
    f = 2 * p * r / (p + r) if p + r else 0.0
    return p, r, f


def corpus_pause_f1(golds: Sequence[PauseAnnotatedSentence], preds: Sequence[PauseAnnotatedSentence]) -> tuple[float, float, float]:
    """Micro-averaged gap P/R/F1 over a corpus."""
    if len(golds) != len(preds):
        raise ValidationError("gold and predicted corpora differ in length")
    tp = n_pred = n_gold = 0
    for g, p in zip(golds, preds):
        if g.raw_text != p.raw_text:
            raise ValidationError("gold and predicted sentences have different raw text")
        gs, ps = set(g.pause_offsets), set(p.pause_offsets)
        tp += len(gs & ps)
        n_pred += len(ps)
        n_gold += len(gs)
    return _prf_counts(tp, n_pred, n_gold)


# -- serialization ------------------------------------------------------------


def render_pause_model(model: PauseModel) -> str:
    """Flat key-value text. Header keys first, then one ``score:<json key>=<p>`` per signature."""
    lines = [
        f"format={FORMAT_NAME}",
        f"version={FORMAT_VERSION}",
        f"window={model.window_size}",
        f"threshold={model.threshold!r}",
        f"prior={model.prior!r}",
    ]
    for sig in sorted(model.boundary_scores):
        key = json.dumps(sig, ensure_ascii=False)
        lines.append(f"score:{key}={model.boundary_scores[sig]!r}")
    return "".join(l + "\n" for l in lines)


def parse_pause_model(text: str, path=None) -> PauseModel:
    header: dict[str, str] = {}
    scores: dict[str, float] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.rpartition("=")
        if not sep:
            raise ParseError("expected key=value", lineno, path)
        try:
            if key.startswith("score:"):
                scores[json.loads(key[len("score:"):])] = float(value)
            else:
                header[key] = value
        except (ValueError, json.JSONDecodeError) as exc:
            raise ParseError(f"bad entry: {exc}", lineno, path) from None
    if header.get("format") != FORMAT_NAME:
        raise ParseError("not a pause model file", path=path)
    if header.get("version") != str(FORMAT_VERSION):
        raise ParseError(f"unsupported pause model version {header.get('version')}", path=path)
    try:
        return PauseModel(int(header["window"]), scores, float(header["threshold"]), float(header["prior"]))
    except (KeyError, ValueError) as exc:
        raise ParseError(f"bad pause model header: {exc}", path=path) from None


def save_pause_model(model: PauseModel, path) -> None:
    Path(path).write_text(render_pause_model(model), encoding="utf-8")


def load_pause_model(path) -> PauseModel:
    return parse_pause_model(nfc(Path(path).read_text(encoding="utf-8")), path)
