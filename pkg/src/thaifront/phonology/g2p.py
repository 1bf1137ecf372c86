"""Tone assignment and grapheme-to-phoneme conversion."""

from __future__ import annotations

from collections import Counter
from typing import Callable, Iterable, Mapping, Optional

from ..corpus_io import PhonemeToneEntry, PhonemeToneSequence, Syllable, Tone
from ..errors import UnresolvableWordError, ValidationError
from .syllables import SyllableParseError, SyllableStructure, parse_syllables
from .tables import ConsonantClass, ToneRules, consonants, default_tone_rules, ipa_inventory

Fallback = Callable[[str], Optional[PhonemeToneSequence]]


def consonant_class(ch: str) -> ConsonantClass:
    try:
        return consonants()[ch].cls
    except KeyError:
        raise ValidationError(f"{ch!r} is not a Thai consonant letter") from None


def determine_tone(s: SyllableStructure, rules: ToneRules | None = None) -> Tone:
    rules = rules or default_tone_rules()
    return rules.lookup((s.consonant_class, s.liveness, s.vowel_length, s.tone_mark))


def rule_g2p(word: str, rules: ToneRules | None = None) -> PhonemeToneSequence:
    """Pronounce ``word`` from spelling rules alone."""
    syls = parse_syllables(word)
    return PhonemeToneSequence(tuple(Syllable(s.phonemes, determine_tone(s, rules)) for s in syls))


def check_inventory(seq: PhonemeToneSequence, inventory: Iterable[str] | None = None) -> None:
    inv = ipa_inventory() if inventory is None else frozenset(inventory)
    bad = [p for p in seq.phonemes if p not in inv]
    if bad:
        raise ValidationError(f"phonemes outside the inventory: {bad}")


def g2p(word: str, exceptions: Mapping[str, PhonemeToneSequence] | None = None,
        fallback: Fallback | None = None, rules: ToneRules | None = None) -> PhonemeToneSequence:
    """Exception entry if present, else spelling rules, else the fallback hook."""
    if not word:
        raise ValidationError("empty word")
    if exceptions and word in exceptions:
        return exceptions[word]
    try:
        seq = rule_g2p(word, rules)
    except SyllableParseError as exc:
        if fallback is not None:
            seq = fallback(word)
            if seq is not None:
                return seq
        raise UnresolvableWordError(word, str(exc)) from None
    check_inventory(seq)
    return seq


def exception_dict(entries: Iterable[PhonemeToneEntry]) -> dict[str, PhonemeToneSequence]:
    """Exception dictionary from annotation entries; the first entry per word wins."""
    out: dict[str, PhonemeToneSequence] = {}
    for e in entries:
        out.setdefault(e.word, e.sequence)
    return out


def annotation_fallback(entries: Iterable[PhonemeToneEntry]) -> Fallback:
    """Fallback returning the most frequent annotated pronunciation of a word.

    Ties go to the pronunciation seen first.
    """
    counts: dict[str, Counter] = {}
    for e in entries:
        counts.setdefault(e.word, Counter())[e.sequence] += 1
    table = {w: c.most_common(1)[0][0] for w, c in counts.items()}
    return table.get


def phoneme_error_rate(refs: Iterable[PhonemeToneSequence], hyps: Iterable[PhonemeToneSequence | None]) -> float:
    """Edit distance over tone-tagged syllable phonemes, normalised by reference length.

    A missing hypothesis (``None``) counts every reference token as deleted.
    """
    from ..evaluation import edit_ops

    errors = total = 0
    for ref, hyp in zip(refs, hyps, strict=True):
        r = _tone_tagged(ref)
        h = _tone_tagged(hyp) if hyp is not None else []
        errors += edit_ops(r, h).distance
        total += len(r)
    if total == 0:
        raise ValidationError("empty reference set")
    return errors / total


def _tone_tagged(seq: PhonemeToneSequence) -> list[str]:
    out = []
    for syl in seq.syllables:
        out.extend(syl.phonemes[:-1])
        out.append(f"{syl.phonemes[-1]}{int(syl.tone)}")
    return out


