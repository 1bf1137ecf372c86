"""Raw text -> pauses -> words -> phoneme-tone syllables -> token ids.

Each stage is a plain function over one line so that the ``pipeline``
command and the chained single-stage commands share code and produce the
same bytes.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Iterable, Sequence

from . import corpus_io
from .corpus_io import DEFAULT_PAUSE_TAG, Syllable, Utterance
from .encoding import PhonemeVocab, encode_items, load_vocab, render_ids
from .errors import ParseError, ThaiFrontError, ValidationError
from .pauses import PauseModel, load_pause_model, predict_pauses
from .phonology import annotation_fallback, exception_dict, g2p, ipa_inventory, load_tone_rules
from .phonology.tables import ToneRules, default_tone_rules
from .segmentation import TrieIndex, build_trie, grapheme_clusters, is_boundary_cluster, segment

log = logging.getLogger("thaifront")

DEFAULT_SEP = "|"
STAGES = ("pauses", "segment", "g2p", "encode")


def log_event(event: str, level=logging.INFO, **kv) -> None:
    parts = [f"event={event}"] + [f"{k}={v!r}" if isinstance(v, str) else f"{k}={v}" for k, v in kv.items()]
    log.log(level, " ".join(parts))


@dataclass
class PipelineConfig:
    lexicon: str | None = None
    vocab: str | None = None
    pause_model: str | None = None
    exceptions: str | None = None
    annotations: str | None = None
    rules_table: str | None = None
    pause_tag: str = DEFAULT_PAUSE_TAG
    threshold: float | None = None
    separator: str = DEFAULT_SEP
    seg_mode: str = "default"
    sample_rate: int = 24000
    fft_size: int = 1024
    hop: int = 256
    win: int = 1024
    n_mels: int = 80
    fmin: float = 0.0
    fmax: float = 12000.0
    pitch_fmin: float = 60.0
    pitch_fmax: float = 400.0
    seed: int = 0

    PATH_FIELDS = ("lexicon", "vocab", "pause_model", "exceptions", "annotations", "rules_table")
    REQUIRED = ("lexicon", "vocab")

    @classmethod
    def from_mapping(cls, values: dict) -> "PipelineConfig":
        cfg = cls()
        for f in fields(cls):
            if f.name in values and values[f.name] is not None:
                setattr(cfg, f.name, _coerce(f.type, values[f.name], f.name))
        return cfg

    def to_mapping(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def _coerce(type_name, value, name):
    t = str(type_name)
    try:
        if t.startswith("int"):
            return int(value)
        if t.startswith("float"):
            return float(value)
    except ValueError:
        raise ValidationError(f"config field {name!r}: cannot parse {value!r}") from None
    return str(value)


def parse_config_text(text: str, path=None) -> dict[str, str]:
    """Flat ``key = value`` lines; ``#`` starts a comment line."""
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        key, sep, value = s.partition("=")
        if not sep:
            raise ParseError("expected key = value", lineno, path)
        key = key.strip()
        if key in out:
            raise ParseError(f"duplicate key {key!r}", lineno, path)
        out[key] = value.strip()
    return out


def load_config_file(path) -> dict[str, str]:
    return parse_config_text(Path(path).read_text(encoding="utf-8"), path)


@dataclass
class ConfigReport:
    failures: list[tuple[str, str]] = field(default_factory=list)
    warnings: list[tuple[str, str]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures


def validate_config(cfg: PipelineConfig) -> ConfigReport:
    """Check paths, file versions and cross-file compatibility. Reads only."""
    report = ConfigReport()
    for name in PipelineConfig.REQUIRED:
        if not getattr(cfg, name):
            report.failures.append((name, "required path not set"))
    for name in PipelineConfig.PATH_FIELDS:
        p = getattr(cfg, name)
        if p and not Path(p).is_file():
            report.failures.append((name, f"file not found: {p}"))
    if not cfg.pause_tag:
        report.failures.append(("pause_tag", "empty pause tag"))
    if cfg.seg_mode not in ("default", "frequency"):
        report.failures.append(("seg_mode", f"unknown mode {cfg.seg_mode!r}"))
    if cfg.threshold is not None and cfg.threshold < 0:
        report.failures.append(("threshold", "negative threshold"))

    def attempt(name, loader):
        p = getattr(cfg, name)
        if not p or not Path(p).is_file():
            return None
        try:
            return loader(p)
        except (ThaiFrontError, ValueError, UnicodeDecodeError) as exc:
            report.failures.append((name, str(exc)))
            return None

    attempt("lexicon", corpus_io.load_lexicon)
    vocab = attempt("vocab", load_vocab)
    attempt("pause_model", load_pause_model)
    attempt("rules_table", load_tone_rules)
    exc_entries = attempt("exceptions", corpus_io.load_phoneme_tone_annotations)
    ann_entries = attempt("annotations", corpus_io.load_phoneme_tone_annotations)
    if vocab is not None:
        for name, entries in (("exceptions", exc_entries), ("annotations", ann_entries)):
            if entries:
                missing = sorted({p for e in entries for p in e.sequence.phonemes} - set(vocab.base_tokens))
                if missing:
                    report.warnings.append((name, f"phonemes missing from vocab (built from a different annotation file?): {missing}"))
        rule_missing = sorted(ipa_inventory() - set(vocab.base_tokens))
        if rule_missing:
            report.warnings.append(("vocab", f"rule inventory phonemes missing from vocab: {rule_missing}"))
    return report


class StageError(ThaiFrontError):
    def __init__(self, stage: str, message: str, line: int | None = None):
        self.stage = stage
        self.line = line
        super().__init__(f"line {line}: {stage}: {message}" if line is not None else f"{stage}: {message}")


# -- stage functions ------------------------------------------------------------


def stage_pauses(line: str, model: PauseModel | None, trie: TrieIndex, tag: str) -> str:
    if model is None or not line:
        return line
    return predict_pauses(line, model, trie).render(tag)


def stage_segment(tagged: str, trie: TrieIndex, tag: str, mode: str = "default") -> list[str]:
    """Segment each pause-delimited chunk; the tag literal stays as its own token."""
    tokens: list[str] = []
    chunks = tagged.split(tag) if tag else [tagged]
    for i, chunk in enumerate(chunks):
        if i:
            tokens.append(tag)
        if chunk:
            tokens.extend(segment(chunk, trie, mode).tokens)
    return tokens


def is_boundary_token(token: str) -> bool:
    return all(is_boundary_cluster(c) for c in grapheme_clusters(token))


def stage_g2p(tokens: Sequence[str], tag: str, exceptions=None, fallback=None,
              rules: ToneRules | None = None, sep: str = DEFAULT_SEP) -> Utterance:
    items: list[Syllable | None] = []
    for tok in tokens:
        if tok == tag:
            items.append(None)
        elif tok and not is_boundary_token(tok):
            items.extend(g2p(tok, exceptions, fallback, rules).syllables)
    return Utterance(sep.join(tokens), tuple(items))


def stage_encode(utt: Utterance, vocab: PhonemeVocab) -> str:
    if not utt.items:
        return ""
    enc = encode_items(utt.items, vocab)
    if enc.unknown:
        log_event("unknown_phonemes", logging.WARNING, phonemes=" ".join(enc.unknown))
    return render_ids(enc)


# -- assembled pipeline ---------------------------------------------------------


@dataclass
class Resources:
    trie: TrieIndex
    vocab: PhonemeVocab | None
    pause_model: PauseModel | None
    exceptions: dict
    fallback: object
    rules: ToneRules


def load_resources(cfg: PipelineConfig, need_vocab: bool = True) -> Resources:
    if not cfg.lexicon:
        raise ValidationError("lexicon path not configured")
    trie = build_trie(corpus_io.load_lexicon(cfg.lexicon))
    vocab = load_vocab(cfg.vocab) if cfg.vocab else None
    if need_vocab and vocab is None:
        raise ValidationError("vocab path not configured")
    model = load_pause_model(cfg.pause_model) if cfg.pause_model else None
    if model is not None and cfg.threshold is not None:
        model = model.with_threshold(cfg.threshold)
    exceptions = exception_dict(corpus_io.load_phoneme_tone_annotations(cfg.exceptions)) if cfg.exceptions else {}
    fallback = annotation_fallback(corpus_io.load_phoneme_tone_annotations(cfg.annotations)) if cfg.annotations else None
    rules = load_tone_rules(cfg.rules_table) if cfg.rules_table else default_tone_rules()
    return Resources(trie, vocab, model, exceptions, fallback, rules)


@dataclass
class LineResult:
    tagged: str = ""
    tokens: list[str] = field(default_factory=list)
    utterance: Utterance | None = None
    ids: str = ""
    error: StageError | None = None

    def stage_text(self, stage: str, sep: str) -> str:
        if stage == "pauses":
            return self.tagged
        if stage == "segment":
            return sep.join(self.tokens)
        if stage == "g2p":
            return self.utterance.render() if self.utterance else f"{sep.join(self.tokens)}\t"
        return self.ids


def process_line(line: str, res: Resources, cfg: PipelineConfig, lineno: int | None = None) -> LineResult:
    out = LineResult()
    stage = "pauses"
    try:
        out.tagged = stage_pauses(line, res.pause_model, res.trie, cfg.pause_tag)
        stage = "segment"
        out.tokens = stage_segment(out.tagged, res.trie, cfg.pause_tag, cfg.seg_mode)
        stage = "g2p"
        out.utterance = stage_g2p(out.tokens, cfg.pause_tag, res.exceptions, res.fallback, res.rules, cfg.separator)
        stage = "encode"
        out.ids = stage_encode(out.utterance, res.vocab)
    except ThaiFrontError as exc:
        out.error = StageError(stage, str(exc), lineno)
    return out


def run_pipeline(lines: Iterable[str], cfg: PipelineConfig, strict: bool = False,
                 res: Resources | None = None) -> list[LineResult]:
    """Process lines in order; errors are recorded per line unless ``strict``."""
    res = res or load_resources(cfg)
    results = []
    for lineno, line in enumerate(lines, 1):
        r = process_line(corpus_io.nfc(line), res, cfg, lineno)
        if r.error is not None:
            log_event("stage_error", logging.ERROR, line=lineno, stage=r.error.stage, message=str(r.error))
            if strict:
                raise r.error
        results.append(r)
    return results
