#!/usr/bin/env python3
"""Finite-difference gradient check and planted-teacher recovery for the predictors."""

from __future__ import annotations

import argparse
import time

import numpy as np

from thaifront.prosody import PARAM_NAMES, PhonemeTargets, ProsodyPredictor, fit_predictors, loss_gradients, total_loss
from thaifront.synthetic import planted_prosody


def numeric_gradient(params, X, targets, name, eps=1e-6):
    base = params[name]
    grad = np.zeros_like(base)
    for i in np.ndindex(base.shape):
        old = base[i]
        base[i] = old + eps
        up = total_loss(params, X, targets)
        base[i] = old - eps
        down = total_loss(params, X, targets)
        base[i] = old
        grad[i] = (up - down) / (2 * eps)
    return grad


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--instances", type=int, default=20)
    ap.add_argument("--steps", type=int, default=5000)
    ap.add_argument("--lr", type=float, default=0.1)
    args = ap.parse_args(argv)

    worst = 0.0
    for seed in range(args.instances):
        rng = np.random.default_rng(seed)
        pp = planted_prosody(vocab_size=5, n_seqs=3, seq_len=4, style_dim=2, window=1, seed=seed)
        n = pp.X.shape[0]
        t = PhonemeTargets(rng.uniform(0, 5, n), rng.normal(size=n), rng.normal(size=n))
        model = ProsodyPredictor.random(5, 1, 2, seed=seed, scale=0.5)
        grads = loss_gradients(model.params, pp.X, t)
        for name in PARAM_NAMES:
            fd = numeric_gradient(model.params, pp.X, t, name)
            rel = np.max(np.abs(grads[name] - fd) / np.maximum(np.abs(fd), 1e-8))
            worst = max(worst, float(rel))
    print(f"gradient check: {args.instances} instances, worst relative error {worst:.2e}")

    pp = planted_prosody(seed=0)
    start = time.process_time()
    history: list[float] = []
    fit_predictors(ProsodyPredictor.zeros(12, 2, 4), pp.X, pp.targets, args.steps, args.lr, history)
    excess = history[-1] - total_loss(pp.teacher.params, pp.X, pp.targets)
    print(f"planted recovery: loss {history[0]:.4g} -> {history[-1]:.3e} in {args.steps} steps, "
          f"excess {excess:.3e}, {time.process_time() - start:.1f} s cpu")
    return 0 if worst <= 1e-4 and excess <= 1e-3 else 1


if __name__ == "__main__":
    raise SystemExit(main())
