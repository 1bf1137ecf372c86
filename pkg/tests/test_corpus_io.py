from __future__ import annotations

import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from thaifront import corpus_io
from thaifront.corpus_io import (
    AudioManifestRecord,
    Lexicon,
    PauseAnnotatedSentence,
    PhonemeToneEntry,
    PhonemeToneSequence,
    Syllable,
    Tone,
    Utterance,
)
from thaifront.errors import ParseError, ValidationError

THAI = st.characters(min_codepoint=0x0E01, max_codepoint=0x0E4B)
WORD = st.text(alphabet=THAI, min_size=1, max_size=6)
PHONEME = st.sampled_from(["k", "kʰ", "aː", "a", "n", "m", "ɯə", "tɕ", "ŋ", "iː"])
SYLLABLE = st.builds(lambda ps, t: Syllable(tuple(ps), Tone(t)),
                     st.lists(PHONEME, min_size=1, max_size=4), st.integers(0, 4))
SEQUENCE = st.builds(lambda s: PhonemeToneSequence(tuple(s)), st.lists(SYLLABLE, min_size=1, max_size=4))


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


class TestLexicon:
    def test_reads_optional_frequency(self, tmp_path):
        lex = corpus_io.load_lexicon(write(tmp_path, "l.txt", "กา\nมา\t5\n"))
        assert lex.entries == {"กา": 1, "มา": 5}

    def test_empty_file(self, tmp_path):
        assert len(corpus_io.load_lexicon(write(tmp_path, "l.txt", ""))) == 0

    def test_duplicate_names_word_and_line(self, tmp_path):
        with pytest.raises(ParseError, match="duplicate word 'กา'") as ei:
            corpus_io.load_lexicon(write(tmp_path, "l.txt", "กา\nมา\nกา\n"))
        assert ei.value.line == 3

    @pytest.mark.parametrize("line", ["ก า", "กา\t-3", "กา\tx", "กา\t 4", "กา\t007", "\t4"])
    def test_malformed_lines(self, tmp_path, line):
        with pytest.raises(ParseError) as ei:
            corpus_io.load_lexicon(write(tmp_path, "l.txt", "ดี\n" + line + "\n"))
        assert ei.value.line == 2

    def test_negative_frequency_message(self, tmp_path):
        with pytest.raises(ParseError, match="negative"):
            corpus_io.load_lexicon(write(tmp_path, "l.txt", "กา\t-1\n"))

    def test_explicit_one_is_kept(self, tmp_path):
        text = "กา\t1\nมา\n"
        p = write(tmp_path, "l.txt", text)
        assert corpus_io.render_lexicon(corpus_io.load_lexicon(p)) == text

    def test_nfc_on_load(self, tmp_path):
        lex = corpus_io.load_lexicon(write(tmp_path, "l.txt", "e\u0301\n"))
        assert list(lex) == ["\u00e9"]

    @given(st.dictionaries(WORD, st.integers(0, 10_000), max_size=15))
    def test_render_parse_identity(self, entries):
        lex = Lexicon(entries)
        again = corpus_io.parse_lexicon(corpus_io.render_lexicon(lex).splitlines())
        assert again == lex
        assert corpus_io.render_lexicon(again) == corpus_io.render_lexicon(lex)


class TestPauseAnnotation:
    def test_single_tag(self):
        s = corpus_io.parse_pause_annotation("ab<SPACE>cd", "<SPACE>")
        assert (s.raw_text, s.pause_offsets) == ("abcd", (2,))

    def test_no_tags(self):
        s = corpus_io.parse_pause_annotation("abcd", "<SPACE>")
        assert (s.raw_text, s.pause_offsets) == ("abcd", ())

    @pytest.mark.parametrize("bad", ["<SPACE>ab", "ab<SPACE>", "a<SPACE><SPACE>b"])
    def test_edge_tags_rejected(self, bad):
        with pytest.raises(ValidationError):
            corpus_io.parse_pause_annotation(bad, "<SPACE>")

    def test_empty_tag_rejected(self):
        with pytest.raises(ValidationError):
            corpus_io.parse_pause_annotation("ab", "")

    def test_custom_tag(self):
        s = corpus_io.parse_pause_annotation("กา|มา", "|")
        assert s.pause_offsets == (2,)
        assert s.render("|") == "กา|มา"

    @pytest.mark.parametrize("offsets", [(0,), (4,), (2, 2), (3, 1)])
    def test_invalid_offsets(self, offsets):
        with pytest.raises(ValidationError):
            PauseAnnotatedSentence("abcd", offsets)

    @given(st.lists(st.text(alphabet=THAI, min_size=1, max_size=5), min_size=1, max_size=8))
    def test_parse_render_identity(self, pieces):
        tagged = "<SPACE>".join(pieces)
        s = corpus_io.parse_pause_annotation(tagged)
        assert s.raw_text == "".join(pieces)
        assert corpus_io.render_pause_annotation(s) == tagged

    def test_corpus_file_round_trip(self, tmp_path):
        text = "กา<SPACE>มา\nดีดี\n"
        p = write(tmp_path, "c.txt", text)
        corpus = corpus_io.load_pause_corpus(p)
        out = tmp_path / "c2.txt"
        corpus_io.save_pause_corpus(corpus, out)
        assert out.read_text(encoding="utf-8") == text

    def test_corpus_error_has_line(self, tmp_path):
        with pytest.raises(ParseError) as ei:
            corpus_io.load_pause_corpus(write(tmp_path, "c.txt", "กา\n<SPACE>มา\n"))
        assert ei.value.line == 2


class TestPhonemeTone:
    def test_single_syllable(self):
        e = corpus_io.parse_phoneme_tone_line("กา\tk aː 0")
        assert e.word == "กา"
        assert e.sequence.syllables == (Syllable(("k", "aː"), Tone.MID),)

    def test_tone_digit_mapping(self):
        e = corpus_io.parse_phoneme_tone_line("x\ta 0 . a 1 . a 2 . a 3 . a 4")
        assert [t.label for t in e.sequence.tones] == ["mid", "low", "falling", "high", "rising"]

    @pytest.mark.parametrize("line", ["กา\tk aː 7", "กา\tk aː", "กา\t", "กา\tk aː 0 .  . m a 1", "กา", "\tk a 0"])
    def test_rejects(self, tmp_path, line):
        with pytest.raises(ParseError) as ei:
            corpus_io.load_phoneme_tone_annotations(write(tmp_path, "a.tsv", "ดี\td iː 0\n" + line + "\n"))
        assert ei.value.line == 2

    def test_three_syllables_round_trip(self, tmp_path):
        text = "สวัสดี\ts a 1 . w a t 1 . d iː 0\n"
        p = write(tmp_path, "a.tsv", text)
        entries = corpus_io.load_phoneme_tone_annotations(p)
        out = tmp_path / "b.tsv"
        corpus_io.save_phoneme_tone_annotations(entries, out)
        assert out.read_bytes() == p.read_bytes()

    @given(WORD, SEQUENCE)
    def test_entry_render_parse_identity(self, word, seq):
        entry = PhonemeToneEntry(word, seq)
        line = corpus_io.render_phoneme_tone_entry(entry)
        assert corpus_io.parse_phoneme_tone_line(line) == entry

    def test_sequence_needs_syllable(self):
        with pytest.raises(ValidationError):
            PhonemeToneSequence(())

    def test_sequence_concatenation(self):
        a = PhonemeToneSequence((Syllable(("k", "a"), Tone.LOW),))
        b = PhonemeToneSequence((Syllable(("m", "aː"), Tone.MID),))
        assert (a + b).phonemes == ["k", "a", "m", "aː"]

    def test_tone_labels(self):
        assert [t.label for t in Tone] == ["mid", "low", "falling", "high", "rising"]
        assert Tone.from_label("rising") is Tone.RISING
        with pytest.raises(ValueError):
            Tone.from_label("sixth")


class TestUtterance:
    def test_pause_group(self):
        u = corpus_io.parse_utterance_line("กา|<SPACE>|มา\tk aː 0 . # . m aː 0")
        assert u.items == (Syllable(("k", "aː"), Tone.MID), None, Syllable(("m", "aː"), Tone.MID))
        assert u.render() == "กา|<SPACE>|มา\tk aː 0 . # . m aː 0"

    def test_empty_groups_allowed(self):
        assert corpus_io.parse_utterance_line("TTS\t") == Utterance("TTS", ())

    def test_needs_tab(self):
        with pytest.raises(ParseError):
            corpus_io.parse_utterance_line("no tab")

    def test_annotation_rejects_pause(self):
        with pytest.raises(ParseError):
            corpus_io.parse_phoneme_tone_line("กา\tk aː 0 . #")


class TestManifest:
    def test_round_trip(self, tmp_path):
        recs = [AudioManifestRecord("a.wav", "กา", 24000), AudioManifestRecord("b.wav", "มา", 16000, "b.align")]
        p = tmp_path / "m.jsonl"
        corpus_io.save_manifest(recs, p)
        assert corpus_io.load_manifest(p) == recs
        text = p.read_text(encoding="utf-8")
        corpus_io.save_manifest(corpus_io.load_manifest(p), p)
        assert p.read_text(encoding="utf-8") == text

    @pytest.mark.parametrize("obj", [
        {"audio_path": "a", "transcript": "", "sample_rate": 1},
        {"audio_path": "a", "transcript": "x", "sample_rate": 0},
        {"audio_path": "a", "transcript": "x"},
        {"audio_path": "a", "transcript": "x", "sample_rate": 1, "speaker": "z"},
    ])
    def test_invalid_records(self, tmp_path, obj):
        with pytest.raises(ParseError):
            corpus_io.load_manifest(write(tmp_path, "m.jsonl", json.dumps(obj) + "\n"))

    def test_not_json(self, tmp_path):
        with pytest.raises(ParseError) as ei:
            corpus_io.load_manifest(write(tmp_path, "m.jsonl", '{"audio_path": "a", "transcript": "x", "sample_rate": 1}\n{oops\n'))
        assert ei.value.line == 2


class TestAlignmentAndFeatures:
    def test_alignment_round_trip(self, tmp_path):
        text = "k\t3\naː\t7\n"
        p = write(tmp_path, "a.tsv", text)
        rows = corpus_io.load_alignment(p)
        assert rows == [("k", 3), ("aː", 7)]
        corpus_io.save_alignment(rows, tmp_path / "b.tsv")
        assert (tmp_path / "b.tsv").read_text(encoding="utf-8") == text

    @pytest.mark.parametrize("line", ["k", "k\t-1", "k\tx"])
    def test_alignment_rejects(self, tmp_path, line):
        with pytest.raises(ParseError):
            corpus_io.load_alignment(write(tmp_path, "a.tsv", line + "\n"))

    def test_feature_record_round_trip(self, tmp_path):
        rng = np.random.default_rng(0)
        sections = {"mel": rng.normal(size=(5, 3)), "pitch": rng.random(5), "style": np.zeros(0), "s": np.array(2.5)}
        p = tmp_path / "x.feat"
        corpus_io.write_feature_record(p, sections)
        back = corpus_io.read_feature_record(p)
        assert list(back) == list(sections)
        for k in sections:
            np.testing.assert_array_equal(back[k], sections[k])
        q = tmp_path / "y.feat"
        corpus_io.write_feature_record(q, back)
        assert q.read_bytes() == p.read_bytes()

    def test_feature_record_layout(self, tmp_path):
        p = tmp_path / "x.feat"
        corpus_io.write_feature_record(p, {"e": np.array([1.0, 2.0])})
        data = p.read_bytes()
        assert data[:8] == b"TFFEAT\0\0"
        assert data[8:12] == b"\x01\x00\x01\x00"
        assert data[12:15] == b"\x01e\x01"
        assert data[15:19] == b"\x02\x00\x00\x00"
        assert np.frombuffer(data[19:], "<f8").tolist() == [1.0, 2.0]

    def test_feature_record_rejects_garbage(self, tmp_path):
        p = tmp_path / "x.feat"
        p.write_bytes(b"nope")
        with pytest.raises(ParseError):
            corpus_io.read_feature_record(p)
        corpus_io.write_feature_record(p, {"e": np.ones(4)})
        p.write_bytes(p.read_bytes()[:-3])
        with pytest.raises(ParseError):
            corpus_io.read_feature_record(p)
