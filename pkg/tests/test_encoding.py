from __future__ import annotations

import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from thaifront.corpus_io import PhonemeToneEntry, PhonemeToneSequence, Syllable, Tone
from thaifront.encoding import (
    EncodedSequence,
    build_vocab,
    decode,
    decode_items,
    encode,
    encode_items,
    parse_vocab,
    render_vocab,
    vocab_from_phonemes,
)
from thaifront.errors import ParseError, ValidationError

INVENTORY = ["k", "kʰ", "aː", "a", "n", "m", "ɯə", "s", "tɕ", "ŋ"]
VOCAB = vocab_from_phonemes(INVENTORY)


def syllables(alphabet=INVENTORY):
    return st.builds(lambda ps, t: Syllable(tuple(ps), Tone(t)),
                     st.lists(st.sampled_from(alphabet), min_size=1, max_size=4), st.integers(0, 4))


SEQUENCES = st.builds(lambda s: PhonemeToneSequence(tuple(s)), st.lists(syllables(), min_size=1, max_size=8))
ITEMS = st.lists(st.one_of(syllables(), st.none()), max_size=10)


class TestVocab:
    def test_two_phonemes(self):
        v = build_vocab([PhonemeToneEntry("x", PhonemeToneSequence((Syllable(("k", "a"), Tone.MID),)))])
        assert len(v) == 15
        assert len(v.base_tokens) == 2 and len(v.merged_tokens) == 10 and len(v.special) == 3

    def test_order_independent(self, annotations):
        shuffled = list(annotations)
        random.Random(2).shuffle(shuffled)
        assert build_vocab(shuffled) == build_vocab(annotations)

    def test_empty(self):
        with pytest.raises(ValidationError):
            build_vocab([])

    @given(st.sets(st.text(alphabet="abcdefgːʰ", min_size=1, max_size=3), min_size=1, max_size=12))
    def test_contiguous_ids(self, phonemes):
        v = vocab_from_phonemes(phonemes)
        ids = sorted([*v.base_tokens.values(), *v.merged_tokens.values(), *v.special.values()])
        assert ids == list(range(len(v)))
        assert max(ids) == len(v) - 1 == 3 + 6 * len(phonemes) - 1

    def test_specials_first(self):
        assert (VOCAB.pad_id, VOCAB.unk_id, VOCAB.pause_id) == (0, 1, 2)

    def test_file_round_trip(self, annotations):
        v = build_vocab(annotations)
        text = render_vocab(v)
        again = parse_vocab(text)
        assert again == v
        assert render_vocab(again) == text
        assert text.splitlines()[0] == "# thaifront-vocab v1"
        assert text.splitlines()[1] == "<pad>\t0\tspecial"

    @pytest.mark.parametrize("mutate", [
        lambda t: t.replace("# thaifront-vocab v1", "# thaifront-vocab v2"),
        lambda t: t.replace("\tbase\n", "\tother\n", 1),
        lambda t: "".join(t.splitlines(keepends=True)[:-1]),
        lambda t: t.replace("\t3\t", "\tx\t", 1),
        lambda t: t.replace(":mid\t", ":tenth\t", 1),
    ])
    def test_parse_errors(self, mutate):
        with pytest.raises(ParseError):
            parse_vocab(mutate(render_vocab(VOCAB)))


class TestEncode:
    def test_direct_rule(self):
        seq = PhonemeToneSequence((Syllable(("k", "aː"), Tone.MID),))
        enc = encode(seq, VOCAB)
        assert enc.ids == (VOCAB.base_tokens["k"], VOCAB.merged_tokens[("aː", Tone.MID)])
        assert enc.syllable_spans == ((0, 2),)

    def test_unknown_phoneme(self):
        seq = PhonemeToneSequence((Syllable(("q", "aː"), Tone.MID), Syllable(("k", "ʔ"), Tone.LOW)))
        enc = encode(seq, VOCAB)
        assert enc.ids[0] == VOCAB.unk_id and enc.ids[3] == VOCAB.unk_id
        assert enc.unknown == ("q", "ʔ")
        assert len(enc) == 4

    @given(SEQUENCES)
    def test_length_and_structure(self, seq):
        enc = encode(seq, VOCAB)
        assert len(enc.ids) == sum(len(s.phonemes) for s in seq.syllables)
        for start, end in enc.syllable_spans:
            assert VOCAB.kind(enc.ids[end - 1]) == "merged"
            assert all(VOCAB.kind(i) == "base" for i in enc.ids[start:end - 1])
        assert decode(enc, VOCAB) == seq

    @given(SEQUENCES, st.data())
    def test_tone_locality(self, seq, data):
        i = data.draw(st.integers(0, len(seq.syllables) - 1))
        new_tone = data.draw(st.sampled_from([t for t in Tone if t != seq.syllables[i].tone]))
        syls = list(seq.syllables)
        syls[i] = Syllable(syls[i].phonemes, new_tone)
        a, b = encode(seq, VOCAB).ids, encode(PhonemeToneSequence(tuple(syls)), VOCAB).ids
        assert sum(x != y for x, y in zip(a, b)) == 1

    @given(ITEMS)
    def test_pauses_round_trip(self, items):
        enc = encode_items(items, VOCAB)
        assert len(enc) == sum(1 if x is None else len(x.phonemes) for x in items)
        assert [enc.ids[p] for p in enc.pause_positions] == [VOCAB.pause_id] * items.count(None)
        assert decode_items(enc, VOCAB) == list(items)


class TestDecodeErrors:
    def setup_method(self):
        seq = PhonemeToneSequence((Syllable(("k", "aː"), Tone.MID), Syllable(("n", "a"), Tone.LOW)))
        self.enc = encode(seq, VOCAB)

    def test_corrupted_span_table(self):
        bad = EncodedSequence(self.enc.ids, ((0, 3), (3, 4)))
        with pytest.raises(ValidationError):
            decode(bad, VOCAB)

    def test_gap_in_spans(self):
        with pytest.raises(ValidationError):
            decode(EncodedSequence(self.enc.ids, ((0, 2),)), VOCAB)

    def test_overlapping_spans(self):
        with pytest.raises(ValidationError):
            decode(EncodedSequence(self.enc.ids, ((0, 2), (1, 4))), VOCAB)

    def test_base_token_at_final_position(self):
        ids = list(self.enc.ids)
        ids[1] = VOCAB.base_tokens["aː"]
        with pytest.raises(ValidationError, match="ends a syllable"):
            decode(EncodedSequence(tuple(ids), self.enc.syllable_spans), VOCAB)

    def test_merged_token_inside(self):
        ids = list(self.enc.ids)
        ids[0] = VOCAB.merged_tokens[("k", Tone.MID)]
        with pytest.raises(ValidationError, match="inside a syllable"):
            decode(EncodedSequence(tuple(ids), self.enc.syllable_spans), VOCAB)

    def test_pause_rejected_by_plain_decode(self):
        enc = encode_items([None, Syllable(("k", "a"), Tone.MID)], VOCAB)
        with pytest.raises(ValidationError):
            decode(enc, VOCAB)
