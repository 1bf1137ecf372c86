#!/usr/bin/env python3
"""STOI of a noisy copy against the clean signal across an SNR sweep."""

from __future__ import annotations

import argparse

from thaifront.audio import read_wav
from thaifront.evaluation import stoi
from thaifront.synthetic import add_noise, modulated_noise


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--wav", help="clean mono 16-bit WAV; a synthetic signal is used when omitted")
    ap.add_argument("--snr", type=float, nargs="+", default=[30, 20, 10, 5, 0, -5, -10])
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    clean = read_wav(args.wav) if args.wav else modulated_noise(3.0, 16000, seed=args.seed)
    print(f"self\t{stoi(clean, clean):.6f}")
    prev = None
    monotone = True
    for snr in sorted(args.snr, reverse=True):
        score = stoi(clean, add_noise(clean, snr, seed=args.seed + 1))
        print(f"{snr:g} dB\t{score:.6f}")
        if prev is not None and score > prev:
            monotone = False
        prev = score
    print("monotone non-increasing" if monotone else "NOT monotone")
    return 0 if monotone else 1


if __name__ == "__main__":
    raise SystemExit(main())
