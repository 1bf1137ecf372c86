"""Template-driven Thai syllabification.

Each vowel template (``data/vowels.tsv``) is a spelling skeleton around an
onset slot ``C``, an optional tone-mark slot ``T`` and a final-consonant slot
``F``. At every position the parser tries templates with the most vowel
letters first, then the longest match, and backtracks when the rest of the
word cannot be parsed. Words with no complete parse are reported with the
offending span so callers can fall back to an exception dictionary.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import ParseError
from .tables import (
    THANTHAKHAT,
    TONE_MARKS,
    ConsonantClass,
    Liveness,
    ToneMark,
    VowelLength,
    VowelTemplate,
    consonants,
    onsets,
    vowel_templates,
)

SONORANT_FINALS = frozenset({"m", "n", "ŋ", "j", "w"})

# a final consonant cannot be followed by anything that needs its own base
_ATTACHING = frozenset("ะัาำิีึืุู็่้๊๋์ๅ")
_SILENT_TAIL = re.compile(r"[ก-ฮ]{1,2}[ิุ]?" + THANTHAKHAT)


class SyllableParseError(ParseError):
    def __init__(self, word: str, start: int):
        self.word = word
        self.span = (start, len(word))
        super().__init__(f"no syllable template matches {word[start:]!r} at offset {start} of {word!r}")


@dataclass(frozen=True)
class SyllableStructure:
    surface: str
    onset: str
    onset_phonemes: tuple[str, ...]
    consonant_class: ConsonantClass
    vowel: str
    vowel_length: VowelLength
    coda: str | None
    coda_phoneme: str | None
    tone_mark: ToneMark = ToneMark.NONE
    silent: str = ""

    @property
    def coda_sonorant(self) -> bool:
        return self.coda_phoneme in SONORANT_FINALS

    @property
    def liveness(self) -> Liveness:
        if self.coda_phoneme is None:
            return Liveness.LIVE if self.vowel_length is VowelLength.LONG else Liveness.DEAD
        return Liveness.LIVE if self.coda_sonorant else Liveness.DEAD

    @property
    def phonemes(self) -> tuple[str, ...]:
        tail = (self.coda_phoneme,) if self.coda_phoneme else ()
        return self.onset_phonemes + (self.vowel,) + tail


@dataclass(frozen=True)
class _Match:
    end: int
    template: VowelTemplate
    onset: object
    tone: str | None
    final: str | None
    silent: str


def _match_template(word: str, pos: int, tpl: VowelTemplate):
    """Yield every way ``tpl`` matches ``word`` at ``pos``."""
    cons = consonants()

    def walk(i, k, onset, tone, final):
        if k == len(tpl.pattern):
            silent = ""
            m = _SILENT_TAIL.match(word, i)
            if m:
                silent = m.group()
                i = m.end()
            yield _Match(i, tpl, onset, tone, final, silent)
            return
        el = tpl.pattern[k]
        if el == "C":
            for o in onsets():
                if word.startswith(o.spelling, i):
                    yield from walk(i + len(o.spelling), k + 1, o, tone, final)
        elif el == "T":
            if i < len(word) and word[i] in TONE_MARKS:
                yield from walk(i + 1, k + 1, onset, word[i], final)
            else:
                yield from walk(i, k + 1, onset, tone, final)
        elif el == "F":
            if i < len(word):
                c = cons.get(word[i])
                nxt = word[i + 1] if i + 1 < len(word) else ""
                if c is not None and c.final is not None and nxt not in _ATTACHING:
                    yield from walk(i + 1, k + 1, onset, tone, word[i])
        elif i < len(word) and word[i] == el:
            yield from walk(i + 1, k + 1, onset, tone, final)

    yield from walk(pos, 0, None, None, None)


def _candidates(word: str, pos: int) -> list[_Match]:
    found = []
    for idx, tpl in enumerate(vowel_templates()):
        for m in _match_template(word, pos, tpl):
            found.append((-tpl.vowel_letters, -(m.end - pos), idx, m))
    found.sort(key=lambda t: t[:3])
    return [t[3] for t in found]


def _structure(word: str, pos: int, m: _Match) -> SyllableStructure:
    tpl = m.template
    if m.final is not None:
        coda_ph = consonants()[m.final].final
    else:
        coda_ph = tpl.implicit_final
    return SyllableStructure(
        surface=word[pos:m.end],
        onset=m.onset.spelling,
        onset_phonemes=m.onset.phonemes,
        consonant_class=m.onset.cls,
        vowel=tpl.vowel,
        vowel_length=tpl.length,
        coda=m.final,
        coda_phoneme=coda_ph,
        tone_mark=ToneMark.from_char(m.tone),
        silent=m.silent,
    )


def parse_syllables(word: str) -> list[SyllableStructure]:
    """Split a Thai word into syllables; the surfaces concatenate to ``word``."""
    if not word:
        raise SyllableParseError(word, 0)
    n = len(word)
    failed: set[int] = set()
    furthest = 0

    def solve(pos):
        nonlocal furthest
        if pos == n:
            return []
        if pos in failed:
            return None
        furthest = max(furthest, pos)
        for m in _candidates(word, pos):
            rest = solve(m.end)
            if rest is not None:
                return [_structure(word, pos, m)] + rest
        failed.add(pos)
        return None

    result = solve(0)
    if result is None:
        raise SyllableParseError(word, furthest)
    return result
