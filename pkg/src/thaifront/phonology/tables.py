"""Loaders for the orthography tables shipped in ``data/``.

The tables are plain TSV so they can be audited and patched without
touching code. ``# name vN`` on the first line carries the format version.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path

from ..corpus_io import Tone, nfc
from ..errors import ParseError

RULES_FORMAT = "thaifront-tone-rules"
RULES_VERSION = 1

TONE_MARKS = {"่": "mai_ek", "้": "mai_tho", "๊": "mai_tri", "๋": "mai_chattawa"}
THANTHAKHAT = "์"


class ConsonantClass(str, enum.Enum):
    HIGH = "high"
    MID = "mid"
    LOW = "low"


class Liveness(str, enum.Enum):
    LIVE = "live"
    DEAD = "dead"


class VowelLength(str, enum.Enum):
    SHORT = "short"
    LONG = "long"


class ToneMark(str, enum.Enum):
    NONE = "none"
    MAI_EK = "mai_ek"
    MAI_THO = "mai_tho"
    MAI_TRI = "mai_tri"
    MAI_CHATTAWA = "mai_chattawa"

    @classmethod
    def from_char(cls, ch: str | None) -> "ToneMark":
        return cls.NONE if not ch else cls(TONE_MARKS[ch])


@dataclass(frozen=True)
class Consonant:
    letter: str
    cls: ConsonantClass
    initial: str
    final: str | None


@dataclass(frozen=True)
class Onset:
    spelling: str
    phonemes: tuple[str, ...]
    cls: ConsonantClass


@dataclass(frozen=True)
class VowelTemplate:
    pattern: str
    vowel: str
    length: VowelLength
    implicit_final: str | None

    @property
    def has_final(self) -> bool:
        return "F" in self.pattern

    @property
    def vowel_letters(self) -> int:
        return sum(1 for c in self.pattern if c not in "CTF")


def _data_lines(name: str) -> list[tuple[int, list[str]]]:
    text = resources.files("thaifront.phonology").joinpath("data", name).read_text(encoding="utf-8")
    return _tsv_rows(nfc(text))


def _tsv_rows(text: str) -> list[tuple[int, list[str]]]:
    rows = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip() or line.startswith("#"):
            continue
        rows.append((lineno, line.split("\t")))
    return rows


@lru_cache(maxsize=None)
def consonants() -> dict[str, Consonant]:
    out = {}
    for lineno, cols in _data_lines("consonants.tsv"):
        letter, cls, initial, final = cols
        out[letter] = Consonant(letter, ConsonantClass(cls), initial, None if final == "-" else final)
    return out


@lru_cache(maxsize=None)
def onsets() -> tuple[Onset, ...]:
    """All onsets, multi-letter rewrites first, then single letters; longest first."""
    multi = [Onset(sp, tuple(ph.split(" ")), ConsonantClass(c)) for _, (sp, ph, c) in _data_lines("onsets.tsv")]
    single = [Onset(c.letter, (c.initial,), c.cls) for c in consonants().values()]
    return tuple(sorted(multi, key=lambda o: -len(o.spelling)) + single)


@lru_cache(maxsize=None)
def vowel_templates() -> tuple[VowelTemplate, ...]:
    out = []
    for _, (pattern, vowel, length, implicit) in _data_lines("vowels.tsv"):
        out.append(VowelTemplate(pattern, vowel, VowelLength(length), None if implicit == "-" else implicit))
    return tuple(out)


ToneKey = tuple[ConsonantClass, Liveness, VowelLength, ToneMark]


@dataclass(frozen=True)
class ToneRules:
    """The full tone grid: one tone per (class, liveness, length, mark) cell."""

    cells: dict
    nonstandard: frozenset = frozenset()

    def lookup(self, key: ToneKey) -> Tone:
        return self.cells[key]


def parse_tone_rules(text: str, path=None) -> ToneRules:
    lines = text.splitlines()
    head = lines[0].lstrip("# ").split() if lines else []
    if len(head) != 2 or head[0] != RULES_FORMAT:
        raise ParseError("missing '# thaifront-tone-rules vN' header", 1, path)
    if head[1] != f"v{RULES_VERSION}":
        raise ParseError(f"unsupported rules version {head[1]}", 1, path)
    cells: dict = {}
    nonstandard = set()
    for lineno, cols in _tsv_rows(text):
        if len(cols) not in (5, 6):
            raise ParseError("expected class, liveness, length, mark, tone[, status]", lineno, path)
        try:
            key = (ConsonantClass(cols[0]), Liveness(cols[1]), VowelLength(cols[2]), ToneMark(cols[3]))
            tone = Tone.from_label(cols[4])
        except ValueError as exc:
            raise ParseError(str(exc), lineno, path) from None
        if key in cells:
            raise ParseError(f"duplicate cell {cols[:4]}", lineno, path)
        cells[key] = tone
        if len(cols) == 6 and cols[5] == "nonstandard":
            nonstandard.add(key)
    missing = [k for k in all_tone_keys() if k not in cells]
    if missing:
        raise ParseError(f"rules table misses {len(missing)} cells, e.g. {[m.value for m in missing[0]]}", path=path)
    return ToneRules(cells, frozenset(nonstandard))


def all_tone_keys() -> list[ToneKey]:
    return [(c, l, n, m) for c in ConsonantClass for l in Liveness for n in VowelLength for m in ToneMark]


@lru_cache(maxsize=None)
def default_tone_rules() -> ToneRules:
    text = resources.files("thaifront.phonology").joinpath("data", "tone_rules.tsv").read_text(encoding="utf-8")
    return parse_tone_rules(text, "tone_rules.tsv")


def render_tone_rules(rules: ToneRules) -> str:
    """Canonical text: header, then every cell in grid order with its status."""
    lines = [f"# {RULES_FORMAT} v{RULES_VERSION}"]
    for key in all_tone_keys():
        status = "nonstandard" if key in rules.nonstandard else "standard"
        lines.append("\t".join([*(k.value for k in key), rules.cells[key].label, status]))
    return "".join(l + "\n" for l in lines)


def save_tone_rules(rules: ToneRules, path) -> None:
    Path(path).write_text(render_tone_rules(rules), encoding="utf-8")


def load_tone_rules(path) -> ToneRules:
    return parse_tone_rules(Path(path).read_text(encoding="utf-8"), path)


@lru_cache(maxsize=None)
def ipa_inventory() -> frozenset[str]:
    """Every phoneme string the rule engine can emit."""
    inv = set()
    for c in consonants().values():
        inv.add(c.initial)
        if c.final:
            inv.add(c.final)
    for o in onsets():
        inv.update(o.phonemes)
    for v in vowel_templates():
        inv.add(v.vowel)
        if v.implicit_final:
            inv.add(v.implicit_final)
    return frozenset(inv)
