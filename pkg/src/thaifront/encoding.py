"""Model-facing token ids with tone merged into each syllable's last phoneme.

Every phoneme keeps one position in the id sequence; the final phoneme of a
syllable uses a (phoneme, tone) token instead of the bare phoneme token, so
tone information costs no extra length. Pauses become a dedicated token
between syllables.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .corpus_io import PhonemeToneEntry, PhonemeToneSequence, Syllable, Tone, nfc
from .errors import ParseError, ValidationError

VOCAB_HEADER = "# thaifront-vocab v1"
PAD, UNK, PAUSE = "<pad>", "<unk>", "<pause>"
SPECIALS = (PAD, UNK, PAUSE)


def merged_token(phoneme: str, tone: Tone) -> str:
    return f"{phoneme}:{Tone(tone).label}"


@dataclass(frozen=True)
class PhonemeVocab:
    """Ids: specials, then sorted base phonemes, then merged (phoneme, tone) tokens."""

    base_tokens: dict[str, int]
    merged_tokens: dict[tuple[str, Tone], int]
    special: dict[str, int]

    def __post_init__(self):
        ids = list(self.base_tokens.values()) + list(self.merged_tokens.values()) + list(self.special.values())
        if sorted(ids) != list(range(len(ids))):
            raise ValidationError("vocab ids must be unique and contiguous from 0")
        if set(self.special) != set(SPECIALS):
            raise ValidationError(f"vocab needs exactly the specials {SPECIALS}")
        for ph in self.base_tokens:
            for t in Tone:
                if (ph, t) not in self.merged_tokens:
                    raise ValidationError(f"missing merged token for {ph!r} {t.label}")
        if len(self.merged_tokens) != 5 * len(self.base_tokens):
            raise ValidationError("merged tokens must be exactly five per base phoneme")
        inv: dict[int, tuple] = {}
        for s, i in self.special.items():
            inv[i] = ("special", s)
        for p, i in self.base_tokens.items():
            inv[i] = ("base", p)
        for (p, t), i in self.merged_tokens.items():
            inv[i] = ("merged", p, t)
        object.__setattr__(self, "_by_id", inv)

    def __len__(self):
        return len(self._by_id)

    @property
    def pad_id(self) -> int:
        return self.special[PAD]

    @property
    def unk_id(self) -> int:
        return self.special[UNK]

    @property
    def pause_id(self) -> int:
        return self.special[PAUSE]

    def kind(self, token_id: int) -> str:
        try:
            return self._by_id[token_id][0]
        except KeyError:
            raise ValidationError(f"id {token_id} not in vocab") from None

    def lookup(self, token_id: int) -> tuple:
        return self._by_id[token_id]

    def token_string(self, token_id: int) -> str:
        entry = self._by_id[token_id]
        if entry[0] == "merged":
            return merged_token(entry[1], entry[2])
        return entry[1]


def vocab_from_phonemes(phonemes: Iterable[str]) -> PhonemeVocab:
    base = sorted(set(phonemes))
    special = {s: i for i, s in enumerate(SPECIALS)}
    nxt = len(special)
    base_ids = {}
    for p in base:
        base_ids[p] = nxt
        nxt += 1
    merged = {}
    for p in base:
        for t in Tone:
            merged[(p, t)] = nxt
            nxt += 1
    return PhonemeVocab(base_ids, merged, special)


def build_vocab(annotations: Sequence[PhonemeToneEntry]) -> PhonemeVocab:
    if not annotations:
        raise ValidationError("cannot build a vocab from no annotations")
    return vocab_from_phonemes(p for e in annotations for p in e.sequence.phonemes)


@dataclass(frozen=True)
class EncodedSequence:
    """Token ids plus the (start, end) span of every syllable.

    Spans and pause positions together partition ``range(len(ids))``.
    ``unknown`` lists phonemes that were mapped to the unk id.
    """

    ids: tuple[int, ...]
    syllable_spans: tuple[tuple[int, int], ...]
    pause_positions: tuple[int, ...] = ()
    unknown: tuple[str, ...] = field(default=(), compare=False)

    def __len__(self):
        return len(self.ids)


def _encode_syllable(syl: Syllable, vocab: PhonemeVocab, ids: list, unknown: list) -> None:
    last = len(syl.phonemes) - 1
    for i, ph in enumerate(syl.phonemes):
        key = (ph, syl.tone) if i == last else ph
        table = vocab.merged_tokens if i == last else vocab.base_tokens
        tid = table.get(key)
        if tid is None:
            unknown.append(ph)
            tid = vocab.unk_id
        ids.append(tid)


def encode(seq: PhonemeToneSequence, vocab: PhonemeVocab) -> EncodedSequence:
    return encode_items(seq.syllables, vocab)


def encode_items(items: Iterable[Syllable | None], vocab: PhonemeVocab) -> EncodedSequence:
    """Encode syllables interleaved with pauses (``None``)."""
    ids: list[int] = []
    spans = []
    pauses = []
    unknown: list[str] = []
    for item in items:
        if item is None:
            pauses.append(len(ids))
            ids.append(vocab.pause_id)
            continue
        start = len(ids)
        _encode_syllable(item, vocab, ids, unknown)
        spans.append((start, len(ids)))
    return EncodedSequence(tuple(ids), tuple(spans), tuple(pauses), tuple(unknown))


def decode_items(enc: EncodedSequence, vocab: PhonemeVocab) -> list[Syllable | None]:
    n = len(enc.ids)
    covered = [False] * n
    starts = {}
    for s, e in enc.syllable_spans:
        if not 0 <= s < e <= n:
            raise ValidationError(f"span {(s, e)} outside [0, {n})")
        for i in range(s, e):
            if covered[i]:
                raise ValidationError(f"position {i} covered twice")
            covered[i] = True
        starts[s] = e
    for p in enc.pause_positions:
        if not 0 <= p < n or covered[p]:
            raise ValidationError(f"bad pause position {p}")
        if enc.ids[p] != vocab.pause_id:
            raise ValidationError(f"pause position {p} does not hold the pause id")
        covered[p] = True
        starts[p] = None
    if not all(covered):
        raise ValidationError("spans and pauses do not partition the sequence")

    items: list[Syllable | None] = []
    for start in sorted(starts):
        end = starts[start]
        if end is None:
            items.append(None)
            continue
        phonemes = []
        tone = None
        for i in range(start, end):
            entry = vocab.lookup(enc.ids[i]) if enc.ids[i] in vocab._by_id else None
            if entry is None:
                raise ValidationError(f"id {enc.ids[i]} not in vocab")
            final = i == end - 1
            if final and entry[0] != "merged":
                raise ValidationError(f"position {i} ends a syllable but holds a {entry[0]} token")
            if not final and entry[0] != "base":
                raise ValidationError(f"position {i} is inside a syllable but holds a {entry[0]} token")
            phonemes.append(entry[1])
            if final:
                tone = entry[2]
        items.append(Syllable(tuple(phonemes), tone))
    return items


def decode(enc: EncodedSequence, vocab: PhonemeVocab) -> PhonemeToneSequence:
    items = decode_items(enc, vocab)
    if any(i is None for i in items):
        raise ValidationError("sequence contains pauses; use decode_items")
    return PhonemeToneSequence(tuple(items))


# -- vocab file ---------------------------------------------------------------


def render_vocab(vocab: PhonemeVocab) -> str:
    lines = [VOCAB_HEADER]
    for i in range(len(vocab)):
        lines.append(f"{vocab.token_string(i)}\t{i}\t{vocab.kind(i)}")
    return "".join(l + "\n" for l in lines)


def parse_vocab(text: str, path=None) -> PhonemeVocab:
    lines = text.splitlines()
    if not lines or lines[0] != VOCAB_HEADER:
        raise ParseError(f"expected header {VOCAB_HEADER!r}", 1, path)
    base, merged, special = {}, {}, {}
    for lineno, line in enumerate(lines[1:], 2):
        if not line:
            continue
        cols = line.split("\t")
        if len(cols) != 3:
            raise ParseError("expected token<TAB>id<TAB>kind", lineno, path)
        tok, id_s, kind = cols
        try:
            tid = int(id_s)
            if kind == "special":
                special[tok] = tid
            elif kind == "base":
                base[tok] = tid
            elif kind == "merged":
                ph, _, label = tok.rpartition(":")
                merged[(ph, Tone.from_label(label))] = tid
            else:
                raise ValueError(f"unknown kind {kind!r}")
        except ValueError as exc:
            raise ParseError(str(exc), lineno, path) from None
    try:
        return PhonemeVocab(base, merged, special)
    except ValidationError as exc:
        raise ParseError(str(exc), path=path) from None


def save_vocab(vocab: PhonemeVocab, path) -> None:
    Path(path).write_text(render_vocab(vocab), encoding="utf-8")


def load_vocab(path) -> PhonemeVocab:
    return parse_vocab(nfc(Path(path).read_text(encoding="utf-8")), path)


def render_ids(enc: EncodedSequence) -> str:
    return " ".join(str(i) for i in enc.ids)
