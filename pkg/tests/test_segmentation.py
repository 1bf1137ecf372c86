from __future__ import annotations

import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from thaifront.corpus_io import Lexicon
from thaifront.errors import ValidationError
from thaifront.segmentation import (
    Segmentation,
    build_trie,
    grapheme_clusters,
    segment,
    segment_bruteforce,
    segmentation_cost,
)

from .oracles import segmentations_exhaustive

LATIN = "abc"
THAI_MIX = "กาตลมนี้่ัเ"


def lex(*words, **freqs):
    entries = {w: 1 for w in words}
    entries.update(freqs)
    return Lexicon(entries)


def oov_tokens_are_clusters(seg: Segmentation) -> bool:
    return all(len(grapheme_clusters(t)) == 1 for t, oov in zip(seg.tokens, seg.oov_flags) if oov)


class TestTrie:
    def test_prefix_is_not_word(self):
        t = build_trie(lex("กา", "กาม"))
        assert t.contains("กา") and t.contains("กาม")
        assert not t.contains("ก")

    def test_empty_lexicon(self):
        with pytest.raises(ValidationError):
            build_trie(Lexicon({}))

    def test_single_word_depth(self):
        assert build_trie(lex("สวัสดี")).depth() == len("สวัสดี")

    def test_membership_matches_set(self):
        rng = random.Random(3)
        alphabet = "กขคงจมนาีเ"
        words = {"".join(rng.choice(alphabet) for _ in range(rng.randint(1, 6))) for _ in range(100)}
        t = build_trie(Lexicon({w: 1 for w in words}))
        for _ in range(1000):
            probe = "".join(rng.choice(alphabet) for _ in range(rng.randint(1, 6)))
            assert t.contains(probe) == (probe in words)
        assert set(t.words()) == words
        assert t.node_count() <= sum(len(w) for w in words) + 1

    def test_frequency_lookup(self):
        t = build_trie(lex("กา", มา=5))
        assert t.frequency("มา") == 5
        assert t.frequency("ดี") == 0


class TestSegment:
    def test_empty(self):
        assert segment("", build_trie(lex("a"))) == Segmentation()

    def test_single_oov_char(self):
        s = segment("z", build_trie(lex("a")))
        assert s.tokens == ("z",) and s.oov_flags == (True,)

    def test_thai_example_matches_oracle(self):
        words = lex("ตา", "ก", "ลม")
        s = segment("ตากลม", build_trie(words))
        assert s.tokens == ("ตา", "ก", "ลม")
        assert segmentation_cost(s) == segmentation_cost(segment_bruteforce("ตากลม", words)[0])

    def test_prefers_fewer_tokens(self):
        s = segment("ตากลม", build_trie(lex("ตา", "ก", "ลม", "กลม")))
        assert s.tokens == ("ตา", "กลม")

    def test_longer_earlier_tie_break(self):
        s = segment("aaa", build_trie(lex("a", "aa")))
        assert s.tokens == ("aa", "a")

    def test_combining_marks_stay_attached(self):
        s = segment("เสื้อ", build_trie(lex("ก")))
        assert s.tokens == tuple(grapheme_clusters("เสื้อ"))
        assert len(s.tokens) < len("เสื้อ")
        assert all(s.oov_flags)

    def test_spaces_and_punctuation_are_own_tokens(self):
        s = segment("กา มา,", build_trie(lex("กา", "มา", "มา,")))
        assert s.tokens == ("กา", " ", "มา", ",")
        assert s.oov_flags == (False, True, False, True)

    def test_frequency_mode_breaks_ties(self):
        words = lex("ab", "c", "a", "bc", ab=1, bc=50, a=50, c=1)
        t = build_trie(words)
        assert segment("abc", t).tokens == ("ab", "c")
        assert segment("abc", t, mode="frequency").tokens == ("a", "bc")

    def test_unknown_mode(self):
        with pytest.raises(ValidationError):
            segment("a", build_trie(lex("a")), mode="greedy")

    @given(st.text(max_size=40))
    def test_lossless_on_arbitrary_unicode(self, text):
        s = segment(text, build_trie(lex("กา", "ab", "é")))
        assert s.text == text
        assert oov_tokens_are_clusters(s)

    @given(st.lists(st.text(alphabet=LATIN, min_size=1, max_size=3), min_size=1, max_size=6),
           st.text(alphabet=LATIN, max_size=8), st.text(alphabet=LATIN, min_size=1, max_size=3))
    def test_adding_a_word_never_raises_cost(self, words, text, extra):
        base = Lexicon({w: 1 for w in words})
        before = segmentation_cost(segment(text, build_trie(base)))[:2]
        after = segmentation_cost(segment(text, build_trie(base.with_word(extra))))[:2]
        assert after <= before

    @given(st.lists(st.text(alphabet=LATIN, min_size=1, max_size=3), min_size=1, max_size=6),
           st.text(alphabet=LATIN, max_size=9))
    def test_in_lexicon_tokens(self, words, text):
        s = segment(text, build_trie(Lexicon({w: 1 for w in words})))
        for tok, oov in zip(s.tokens, s.oov_flags):
            assert oov or tok in words


class TestBruteforce:
    def test_hand_enumeration(self):
        segs = segment_bruteforce("aaa", lex("a", "aa"))
        assert {s.tokens for s in segs} == {("a", "a", "a"), ("a", "aa"), ("aa", "a")}

    def test_empty(self):
        assert [s.tokens for s in segment_bruteforce("", lex("a"))] == [()]

    def test_too_long(self):
        with pytest.raises(ValidationError):
            segment_bruteforce("a" * 21, lex("a"))

    def test_sorted_by_cost(self):
        segs = segment_bruteforce("abab", lex("a", "b", "ab", "ba"))
        costs = [segmentation_cost(s) for s in segs]
        assert costs == sorted(costs)

    @given(st.lists(st.text(alphabet=THAI_MIX, min_size=1, max_size=3), min_size=1, max_size=5),
           st.text(alphabet=THAI_MIX, max_size=8))
    def test_matches_independent_enumeration(self, words, text):
        ours = {s.tokens for s in segment_bruteforce(text, words)}
        ref = {tuple(p) for p in segmentations_exhaustive(grapheme_clusters(text), set(words))}
        assert ours == ref
