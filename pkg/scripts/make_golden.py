#!/usr/bin/env python3
"""Regenerate the golden corpus under tests/fixtures/golden.

Writes the pause training corpus, the trained pause model, the vocab, 100
input lines and the expected output of every pipeline stage. Re-running
must leave every file unchanged; the test suite checks the frozen copies.
"""

from __future__ import annotations

import argparse
from pathlib import Path

from thaifront import corpus_io
from thaifront.encoding import build_vocab, save_vocab
from thaifront.pauses import save_pause_model, train_pause_model
from thaifront.pipeline import PipelineConfig, run_pipeline
from thaifront.segmentation import build_trie
from thaifront.synthetic import planted_pause_corpus

FIXTURES = Path(__file__).resolve().parents[1] / "tests" / "fixtures"
TRIGGER = "แล้ว"

# lines that exercise whitespace, punctuation, exceptions and a failing word
EDGE_LINES = [
    "",
    "กินข้าว แล้วไปนอน",
    "สวัสดีครับ, น้ำ!",
    "จริงจริง",
    "TTS",
    "แล้ว",
]


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=FIXTURES / "golden")
    args = ap.parse_args(argv)
    out = args.out
    out.mkdir(parents=True, exist_ok=True)

    lexicon = corpus_io.load_lexicon(FIXTURES / "lexicon.txt")
    trie = build_trie(lexicon)
    train = planted_pause_corpus(list(lexicon.entries), TRIGGER, 200, seed=11, trie=trie)
    corpus_io.save_pause_corpus(train.sentences, out / "pause_corpus.txt")
    model = train_pause_model(list(train.sentences), trie, window=2, threshold=0.5)
    save_pause_model(model, out / "pause.model")

    vocab = build_vocab(corpus_io.load_phoneme_tone_annotations(FIXTURES / "annotations.tsv"))
    save_vocab(vocab, out / "vocab.tsv")

    held = planted_pause_corpus(list(lexicon.entries), TRIGGER, 100 - len(EDGE_LINES), seed=12, trie=trie)
    lines = EDGE_LINES + [s.raw_text for s in held.sentences]
    (out / "input.txt").write_text("".join(l + "\n" for l in lines), encoding="utf-8")

    cfg = PipelineConfig(
        lexicon=str(FIXTURES / "lexicon.txt"),
        vocab=str(out / "vocab.tsv"),
        pause_model=str(out / "pause.model"),
        exceptions=str(FIXTURES / "exceptions.tsv"),
    )
    results = run_pipeline(lines, cfg)
    for stage, name in (("pauses", "expected_pauses.txt"), ("segment", "expected_segment.txt"),
                        ("g2p", "expected_g2p.tsv"), ("encode", "expected_ids.txt")):
        text = "".join(r.stage_text(stage, cfg.separator) + "\n" for r in results)
        (out / name).write_text(text, encoding="utf-8")
    failed = sum(r.error is not None for r in results)
    print(f"wrote {len(lines)} lines to {out} ({failed} with stage errors)")


if __name__ == "__main__":
    main()
