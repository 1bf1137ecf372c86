"""Readers and writers for every on-disk format the front-end consumes.

All text formats are UTF-8 and NFC-normalized on load. Every loader has a
matching ``render_*``/``save_*`` function; rendering a loaded value gives
back the canonical text of the file.

Formats
-------
lexicon
    ``word[\\tfreq]\\n``; a missing frequency means 1 and is omitted again
    on render.
pause corpus
    one tagged sentence per line, tag literal configurable
    (default ``<SPACE>``).
phoneme-tone TSV
    ``word\\tgroups`` where groups are joined by ``" . "`` and each group
    is ``"ph ph ... D"`` with ``D`` the tone digit 0-4
    (mid, low, falling, high, rising).
utterance TSV
    the phoneme-tone TSV grammar plus the pause group ``#`` and an empty
    groups field; used to chain the command-line stages.
manifest
    JSON Lines with ``audio_path``, ``transcript``, ``sample_rate`` and
    optional ``alignment_path``.
alignment
    ``phoneme\\tframes`` per line.
feature record
    binary, see :func:`write_feature_record`.
"""

from __future__ import annotations

import enum
import json
import re
import struct
import unicodedata
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, NamedTuple, Sequence

import numpy as np

from .errors import ParseError, ValidationError

DEFAULT_PAUSE_TAG = "<SPACE>"
PAUSE_GROUP = "#"
GROUP_SEP = " . "
_INT_RE = re.compile(r"-?(0|[1-9][0-9]*)")


class Tone(enum.IntEnum):
    """The five Thai lexical tones; the value is the on-disk digit."""

    MID = 0
    LOW = 1
    FALLING = 2
    HIGH = 3
    RISING = 4

    @property
    def label(self) -> str:
        return self.name.lower()

    @classmethod
    def from_label(cls, label: str) -> "Tone":
        try:
            return cls[label.upper()]
        except KeyError:
            raise ValueError(f"unknown tone {label!r}") from None


class Syllable(NamedTuple):
    phonemes: tuple[str, ...]
    tone: Tone


def _check_syllable(syl: Syllable) -> None:
    if not syl.phonemes:
        raise ValidationError("syllable without phonemes")
    for ph in syl.phonemes:
        if not ph or any(c.isspace() for c in ph) or ph in (".", PAUSE_GROUP):
            raise ValidationError(f"bad phoneme string {ph!r}")
    if not isinstance(syl.tone, Tone):
        raise ValidationError(f"bad tone {syl.tone!r}")


@dataclass(frozen=True)
class PhonemeToneSequence:
    """IPA phonemes grouped into syllables, one tone per syllable."""

    syllables: tuple[Syllable, ...]

    def __post_init__(self):
        syls = tuple(Syllable(tuple(s[0]), Tone(s[1])) for s in self.syllables)
        object.__setattr__(self, "syllables", syls)
        if not syls:
            raise ValidationError("empty phoneme-tone sequence")
        for s in syls:
            _check_syllable(s)

    @property
    def phonemes(self) -> list[str]:
        return [p for s in self.syllables for p in s.phonemes]

    @property
    def tones(self) -> list[Tone]:
        return [s.tone for s in self.syllables]

    def __len__(self):
        return len(self.syllables)

    def __add__(self, other: "PhonemeToneSequence") -> "PhonemeToneSequence":
        return PhonemeToneSequence(self.syllables + other.syllables)


@dataclass(frozen=True)
class PhonemeToneEntry:
    word: str
    sequence: PhonemeToneSequence

    @property
    def syllables(self) -> tuple[Syllable, ...]:
        return self.sequence.syllables


@dataclass(frozen=True)
class Lexicon:
    """Word inventory with counts. Insertion order is kept for rendering."""

    entries: Mapping[str, int] = field(default_factory=dict)
    # words whose count was written out even though it equals the default 1
    explicit: frozenset = field(default=frozenset(), compare=False)

    def __post_init__(self):
        object.__setattr__(self, "explicit", frozenset(self.explicit))
        entries = dict(self.entries)
        for w, f in entries.items():
            _check_word(w)
            if not isinstance(f, int) or f < 0:
                raise ValidationError(f"bad frequency {f!r} for {w!r}")
        object.__setattr__(self, "entries", entries)

    def __contains__(self, word):
        return word in self.entries

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def frequency(self, word: str) -> int:
        return self.entries.get(word, 0)

    def with_word(self, word: str, freq: int = 1) -> "Lexicon":
        entries = dict(self.entries)
        entries[word] = freq
        return Lexicon(entries, self.explicit)


def _check_word(w: str) -> None:
    if not w:
        raise ValidationError("empty word")
    if any(c.isspace() for c in w):
        raise ValidationError(f"word {w!r} contains whitespace")


@dataclass(frozen=True)
class PauseAnnotatedSentence:
    raw_text: str
    pause_offsets: tuple[int, ...] = ()

    def __post_init__(self):
        offs = tuple(int(o) for o in self.pause_offsets)
        object.__setattr__(self, "pause_offsets", offs)
        n = len(self.raw_text)
        prev = 0
        for o in offs:
            if not 0 < o < n:
                raise ValidationError(f"pause offset {o} outside (0, {n})")
            if o <= prev:
                raise ValidationError("pause offsets must be strictly increasing")
            prev = o

    def render(self, tag: str = DEFAULT_PAUSE_TAG) -> str:
        return render_pause_annotation(self, tag)


@dataclass(frozen=True)
class AudioManifestRecord:
    audio_path: str
    transcript: str
    sample_rate: int
    alignment_path: str | None = None

    def __post_init__(self):
        if not isinstance(self.sample_rate, int) or self.sample_rate <= 0:
            raise ValidationError(f"sample_rate must be a positive integer, got {self.sample_rate!r}")
        if not self.transcript:
            raise ValidationError("empty transcript")


def nfc(text: str) -> str:
    return unicodedata.normalize("NFC", text)


def _read_lines(path) -> list[str]:
    text = Path(path).read_text(encoding="utf-8")
    return nfc(text).splitlines()


# -- lexicon -----------------------------------------------------------------


def parse_lexicon(lines: Iterable[str], path=None) -> Lexicon:
    entries: dict[str, int] = {}
    explicit = set()
    for lineno, line in enumerate(lines, 1):
        if not line.strip():
            continue
        word, sep, freq_s = line.partition("\t")
        if not word or any(c.isspace() for c in word):
            raise ParseError(f"malformed word {word!r}", lineno, path)
        freq = 1
        if sep:
            if not _INT_RE.fullmatch(freq_s):
                raise ParseError(f"bad frequency {freq_s!r}", lineno, path)
            freq = int(freq_s)
            if freq < 0:
                raise ParseError(f"negative frequency {freq}", lineno, path)
            explicit.add(word)
        if word in entries:
            raise ParseError(f"duplicate word {word!r}", lineno, path)
        entries[word] = freq
    return Lexicon(entries, frozenset(explicit))


def load_lexicon(path) -> Lexicon:
    return parse_lexicon(_read_lines(path), path)


def render_lexicon(lexicon: Lexicon) -> str:
    out = []
    for w, f in lexicon.entries.items():
        out.append(w if f == 1 and w not in lexicon.explicit else f"{w}\t{f}")
    return "".join(line + "\n" for line in out)


def save_lexicon(lexicon: Lexicon, path) -> None:
    Path(path).write_text(render_lexicon(lexicon), encoding="utf-8")


# -- pause annotations -------------------------------------------------------


def parse_pause_annotation(tagged_line: str, tag: str = DEFAULT_PAUSE_TAG) -> PauseAnnotatedSentence:
    """Split a tagged sentence into raw text and pause offsets.

    Offsets are in raw-text coordinates: ``"ab<SPACE>cd"`` gives ``[2]``.
    """
    if not tag:
        raise ValidationError("pause tag must be non-empty")
    if tagged_line == "":
        return PauseAnnotatedSentence("", ())
    pieces = tagged_line.split(tag)
    offsets = []
    pos = 0
    for i, piece in enumerate(pieces):
        if not piece:
            if i == 0:
                raise ValidationError("pause tag at start of line")
            if i == len(pieces) - 1:
                raise ValidationError("pause tag at end of line")
            raise ValidationError("adjacent pause tags")
        pos += len(piece)
        if i < len(pieces) - 1:
            offsets.append(pos)
    raw = "".join(pieces)
    return PauseAnnotatedSentence(raw, tuple(offsets))


def render_pause_annotation(sent: PauseAnnotatedSentence, tag: str = DEFAULT_PAUSE_TAG) -> str:
    out = []
    prev = 0
    for o in sent.pause_offsets:
        out.append(sent.raw_text[prev:o])
        out.append(tag)
        prev = o
    out.append(sent.raw_text[prev:])
    return "".join(out)


def load_pause_corpus(path, tag: str = DEFAULT_PAUSE_TAG) -> list[PauseAnnotatedSentence]:
    corpus = []
    for lineno, line in enumerate(_read_lines(path), 1):
        if not line:
            continue
        try:
            corpus.append(parse_pause_annotation(line, tag))
        except ValidationError as exc:
            raise ParseError(str(exc), lineno, path) from None
    return corpus


def save_pause_corpus(corpus: Sequence[PauseAnnotatedSentence], path, tag: str = DEFAULT_PAUSE_TAG) -> None:
    text = "".join(render_pause_annotation(s, tag) + "\n" for s in corpus)
    Path(path).write_text(text, encoding="utf-8")


# -- phoneme-tone TSV ----------------------------------------------------------


def render_syllable(syl: Syllable) -> str:
    return " ".join(syl.phonemes) + f" {int(syl.tone)}"


def render_groups(items: Sequence[Syllable | None]) -> str:
    """Render syllables (``None`` marks a pause) as a groups field."""
    return GROUP_SEP.join(PAUSE_GROUP if s is None else render_syllable(s) for s in items)


def parse_groups(field_text: str, allow_pauses: bool = False) -> list[Syllable | None]:
    if field_text == "":
        if allow_pauses:
            return []
        raise ValidationError("empty syllable field")
    items: list[Syllable | None] = []
    for group in field_text.split(GROUP_SEP):
        if group == PAUSE_GROUP:
            if not allow_pauses:
                raise ValidationError("pause group not allowed here")
            items.append(None)
            continue
        tokens = group.split(" ")
        if any(t == "" for t in tokens):
            raise ValidationError(f"empty syllable or stray space in {group!r}")
        if len(tokens) < 2:
            raise ValidationError(f"syllable {group!r} needs phonemes and a tone digit")
        digit = tokens[-1]
        if len(digit) != 1 or digit not in "01234":
            raise ValidationError(f"tone digit {digit!r} outside 0-4")
        syl = Syllable(tuple(tokens[:-1]), Tone(int(digit)))
        _check_syllable(syl)
        items.append(syl)
    return items


def parse_phoneme_tone_line(line: str, lineno=None, path=None) -> PhonemeToneEntry:
    word, sep, rest = line.partition("\t")
    if not sep or not word:
        raise ParseError("expected word<TAB>syllables", lineno, path)
    try:
        syls = parse_groups(rest)
    except ValidationError as exc:
        raise ParseError(str(exc), lineno, path) from None
    return PhonemeToneEntry(word, PhonemeToneSequence(tuple(syls)))


def load_phoneme_tone_annotations(path) -> list[PhonemeToneEntry]:
    entries = []
    for lineno, line in enumerate(_read_lines(path), 1):
        if not line.strip():
            continue
        entries.append(parse_phoneme_tone_line(line, lineno, path))
    return entries


def render_phoneme_tone_entry(entry: PhonemeToneEntry) -> str:
    return f"{entry.word}\t{render_groups(entry.syllables)}"


def render_phoneme_tone_annotations(entries: Iterable[PhonemeToneEntry]) -> str:
    return "".join(render_phoneme_tone_entry(e) + "\n" for e in entries)


def save_phoneme_tone_annotations(entries: Iterable[PhonemeToneEntry], path) -> None:
    Path(path).write_text(render_phoneme_tone_annotations(entries), encoding="utf-8")


@dataclass(frozen=True)
class Utterance:
    """One line of utterance TSV: source text plus syllables and pauses."""

    text: str
    items: tuple[Syllable | None, ...] = ()

    def render(self) -> str:
        return f"{self.text}\t{render_groups(self.items)}"


def parse_utterance_line(line: str, lineno=None, path=None) -> Utterance:
    text, sep, rest = line.partition("\t")
    if not sep:
        raise ParseError("expected text<TAB>groups", lineno, path)
    try:
        items = parse_groups(rest, allow_pauses=True)
    except ValidationError as exc:
        raise ParseError(str(exc), lineno, path) from None
    return Utterance(text, tuple(items))


def load_utterances(path) -> list[Utterance]:
    return [parse_utterance_line(l, i, path) for i, l in enumerate(_read_lines(path), 1)]


# -- manifest -----------------------------------------------------------------

_MANIFEST_KEYS = ("audio_path", "transcript", "sample_rate", "alignment_path")


def parse_manifest_line(line: str, lineno=None, path=None) -> AudioManifestRecord:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", lineno, path) from None
    if not isinstance(obj, dict):
        raise ParseError("manifest record must be a JSON object", lineno, path)
    unknown = set(obj) - set(_MANIFEST_KEYS)
    missing = {"audio_path", "transcript", "sample_rate"} - set(obj)
    if unknown or missing:
        raise ParseError(f"unknown fields {sorted(unknown)}, missing {sorted(missing)}", lineno, path)
    try:
        return AudioManifestRecord(
            audio_path=str(obj["audio_path"]),
            transcript=nfc(str(obj["transcript"])),
            sample_rate=obj["sample_rate"],
            alignment_path=obj.get("alignment_path"),
        )
    except ValidationError as exc:
        raise ParseError(str(exc), lineno, path) from None


def load_manifest(path) -> list[AudioManifestRecord]:
    records = []
    for lineno, line in enumerate(_read_lines(path), 1):
        if line.strip():
            records.append(parse_manifest_line(line, lineno, path))
    return records


def render_manifest_record(rec: AudioManifestRecord) -> str:
    obj = {"audio_path": rec.audio_path, "transcript": rec.transcript, "sample_rate": rec.sample_rate}
    if rec.alignment_path is not None:
        obj["alignment_path"] = rec.alignment_path
    return json.dumps(obj, ensure_ascii=False)


def save_manifest(records: Iterable[AudioManifestRecord], path) -> None:
    text = "".join(render_manifest_record(r) + "\n" for r in records)
    Path(path).write_text(text, encoding="utf-8")


# -- alignment ----------------------------------------------------------------


def load_alignment(path) -> list[tuple[str, int]]:
    rows = []
    for lineno, line in enumerate(_read_lines(path), 1):
        if not line.strip():
            continue
        ph, sep, n = line.partition("\t")
        if not sep or not ph:
            raise ParseError("expected phoneme<TAB>frames", lineno, path)
        try:
            frames = int(n)
        except ValueError:
            raise ParseError(f"bad frame count {n!r}", lineno, path) from None
        if frames < 0:
            raise ParseError(f"negative frame count {frames}", lineno, path)
        rows.append((ph, frames))
    return rows


def save_alignment(rows: Iterable[tuple[str, int]], path) -> None:
    Path(path).write_text("".join(f"{p}\t{n}\n" for p, n in rows), encoding="utf-8")


# -- feature records ----------------------------------------------------------

FEATURE_MAGIC = b"TFFEAT\0\0"
FEATURE_VERSION = 1


def write_feature_record(path, sections: Mapping[str, np.ndarray]) -> None:
    """Write named float arrays as one binary feature record.

    Layout (all little-endian): 8-byte magic ``TFFEAT\\0\\0``, u16 version,
    u16 section count; then per section a u8 name length, ASCII name,
    u8 ndim, ndim x u32 shape and the float64 data in row-major order.
    """
    buf = bytearray(FEATURE_MAGIC)
    buf += struct.pack("<HH", FEATURE_VERSION, len(sections))
    for name, arr in sections.items():
        arr = np.ascontiguousarray(np.asarray(arr, dtype="<f8"))
        raw_name = name.encode("ascii")
        if not 0 < len(raw_name) < 256 or arr.ndim > 255:
            raise ValueError(f"bad section {name!r}")
        buf += struct.pack("<B", len(raw_name)) + raw_name
        buf += struct.pack("<B", arr.ndim)
        buf += struct.pack(f"<{arr.ndim}I", *arr.shape)
        buf += arr.tobytes(order="C")
    Path(path).write_bytes(bytes(buf))


def read_feature_record(path) -> dict[str, np.ndarray]:
    data = Path(path).read_bytes()
    if data[:8] != FEATURE_MAGIC:
        raise ParseError("not a feature record", path=path)
    version, n = struct.unpack_from("<HH", data, 8)
    if version != FEATURE_VERSION:
        raise ParseError(f"unsupported feature record version {version}", path=path)
    pos = 12
    out: dict[str, np.ndarray] = {}
    try:
        for _ in range(n):
            (ln,) = struct.unpack_from("<B", data, pos)
            pos += 1
            name = data[pos:pos + ln].decode("ascii")
            pos += ln
            (ndim,) = struct.unpack_from("<B", data, pos)
            pos += 1
            shape = struct.unpack_from(f"<{ndim}I", data, pos)
            pos += 4 * ndim
            count = int(np.prod(shape)) if ndim else 1
            arr = np.frombuffer(data, dtype="<f8", count=count, offset=pos).reshape(shape)
            pos += 8 * count
            out[name] = arr.astype(np.float64)
    except (struct.error, ValueError) as exc:
        raise ParseError(f"truncated feature record: {exc}", path=path) from None
    if pos != len(data):
        raise ParseError("trailing bytes in feature record", path=path)
    return out
