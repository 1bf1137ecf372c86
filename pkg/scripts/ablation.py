#!/usr/bin/env python3
"""Switch the pause model and the exception dictionary off, one at a time.

Prints the metric with each component on and off. Only the direction of
the change is meaningful on these small planted corpora.
"""

from __future__ import annotations

import argparse
from pathlib import Path

from thaifront import corpus_io
from thaifront.ablation import exception_ablation, pause_ablation
from thaifront.phonology import exception_dict
from thaifront.segmentation import build_trie

FIXTURES = Path(__file__).resolve().parents[1] / "tests" / "fixtures"


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--lexicon", type=Path, default=FIXTURES / "lexicon.txt")
    ap.add_argument("--annotations", type=Path, default=FIXTURES / "annotations.tsv",
                    help="gold pronunciations for every word that can appear")
    ap.add_argument("--exceptions", type=Path, default=FIXTURES / "exceptions.tsv")
    ap.add_argument("--trigger", default="แล้ว", help="word after which a pause is planted")
    ap.add_argument("--sentences", type=int, default=100)
    ap.add_argument("--seeds", type=int, default=5)
    args = ap.parse_args(argv)

    lexicon = corpus_io.load_lexicon(args.lexicon)
    trie = build_trie(lexicon)
    gold = exception_dict(corpus_io.load_phoneme_tone_annotations(args.annotations))
    exc = exception_dict(corpus_io.load_phoneme_tone_annotations(args.exceptions))
    held = True
    for seed in range(args.seeds):
        p = pause_ablation(list(lexicon.entries), args.trigger, trie, n_test=args.sentences, seed=seed)
        e = exception_ablation(gold, exc, trie, n=args.sentences, seed=seed)
        print(f"seed={seed} {p.line()}")
        print(f"seed={seed} {e.line()}")
        held &= p.disabled == p.baseline < p.enabled and e.disabled > e.enabled
    print("direction holds on every seed" if held else "direction VIOLATED on at least one seed")
    return 0 if held else 1


if __name__ == "__main__":
    raise SystemExit(main())
