"""Duration/pitch/energy predictors and the reconstruction and joint losses.

The contextual phoneme representation is a deterministic stand-in for a
pretrained encoder: for token ``i`` it concatenates the one-hot of the token
with the mean one-hot over ``ids[i - window : i + window + 1]`` (indices
clamped to the sequence). Each predictor is affine in
``[representation row, style vector]``; duration goes through softplus so it
stays non-negative, pitch and energy are predicted in standardised units.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .audio import MelFrames, ProsodyFeatures, Waveform, span_average
from .encoding import EncodedSequence
from .errors import ParseError, ValidationError

PARAM_NAMES = ("dur_w", "dur_b", "pitch_w", "pitch_b", "energy_w", "energy_b")
MODEL_MAGIC = b"TFPROS\0\0"
MODEL_VERSION = 1


def softplus(z):
    return np.logaddexp(0.0, z)


def sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def _ids(seq) -> np.ndarray:
    return np.asarray(seq.ids if isinstance(seq, EncodedSequence) else seq, dtype=np.int64)


def contextual_representation(ids: EncodedSequence | Sequence[int], vocab_size: int, window: int = 2) -> np.ndarray:
    """(seq_len, 2 * vocab_size) matrix: centre one-hot then window-mean one-hot."""
    ids = _ids(ids)
    n = ids.size
    if n == 0:
        raise ValidationError("empty id sequence")
    if window < 0:
        raise ValidationError("window must be >= 0")
    if ids.min() < 0 or ids.max() >= vocab_size:
        raise ValidationError("id outside the vocabulary")
    onehot = np.zeros((n, vocab_size))
    onehot[np.arange(n), ids] = 1.0
    ctx = np.zeros((n, vocab_size))
    for off in range(-window, window + 1):
        idx = np.clip(np.arange(n) + off, 0, n - 1)
        ctx += onehot[idx]
    ctx /= 2 * window + 1
    return np.hstack([onehot, ctx])


@dataclass(frozen=True)
class LossWeights:
    time: float = 1.0
    freq: float = 1.0
    perceptual: float = 1.0

    def __post_init__(self):
        for v in (self.time, self.freq, self.perceptual):
            if not np.isfinite(v) or v < 0:
                raise ValidationError("loss weights must be finite and non-negative")


@dataclass
class ProsodyPredictor:
    """Three affine regressors over ``[representation, style]``.

    ``pitch_stats``/``energy_stats`` hold the (mean, scale) used to
    standardise targets during training; :func:`predict_prosody` maps back.
    """

    vocab_size: int
    window: int
    style_dim: int
    params: dict[str, np.ndarray] = field(default_factory=dict)
    pitch_stats: tuple[float, float] = (0.0, 1.0)
    energy_stats: tuple[float, float] = (0.0, 1.0)

    @property
    def input_dim(self) -> int:
        return 2 * self.vocab_size + self.style_dim

    @classmethod
    def zeros(cls, vocab_size: int, window: int, style_dim: int) -> "ProsodyPredictor":
        m = cls(vocab_size, window, style_dim)
        d = m.input_dim
        m.params = {"dur_w": np.zeros(d), "dur_b": np.zeros(1), "pitch_w": np.zeros(d),
                    "pitch_b": np.zeros(1), "energy_w": np.zeros(d), "energy_b": np.zeros(1)}
        return m

    @classmethod
    def random(cls, vocab_size: int, window: int, style_dim: int, seed: int = 0, scale: float = 0.1) -> "ProsodyPredictor":
        rng = np.random.default_rng(seed)
        m = cls.zeros(vocab_size, window, style_dim)
        for k in PARAM_NAMES:
            m.params[k] = rng.normal(0.0, scale, m.params[k].shape)
        return m

    def copy(self) -> "ProsodyPredictor":
        return replace(self, params={k: v.copy() for k, v in self.params.items()})


def model_inputs(rep: np.ndarray, style) -> np.ndarray:
    style = np.asarray(style, dtype=np.float64)
    return np.hstack([rep, np.broadcast_to(style, (rep.shape[0], style.size))])


def _forward(params, X):
    z_d = X @ params["dur_w"] + params["dur_b"][0]
    d = softplus(z_d)
    p = X @ params["pitch_w"] + params["pitch_b"][0]
    e = X @ params["energy_w"] + params["energy_b"][0]
    return z_d, d, p, e


def predict_prosody(rep: np.ndarray, s, model: ProsodyPredictor, standardized: bool = False):
    """Return per-token (duration, pitch, energy).

    Pitch and energy come back in target units unless ``standardized``.
    """
    s = np.asarray(s, dtype=np.float64)
    if rep.ndim != 2 or rep.shape[1] + s.size != model.input_dim:
        raise ValidationError(f"input dim {rep.shape[1]} + {s.size} does not match model ({model.input_dim})")
    _, d, p, e = _forward(model.params, model_inputs(rep, s))
    if not standardized:
        p = p * model.pitch_stats[1] + model.pitch_stats[0]
        e = e * model.energy_stats[1] + model.energy_stats[0]
    return d, p, e


# -- losses -------------------------------------------------------------------


def _check_scalars(*xs):
    for x in xs:
        if not np.isfinite(x) or x < 0:
            raise ValidationError(f"loss terms must be finite and non-negative, got {x}")


def loss_time(w: Waveform, w_hat: Waveform) -> float:
    """Mean absolute sample difference."""
    if len(w) != len(w_hat) or w.sample_rate != w_hat.sample_rate:
        raise ValidationError("waveforms differ in length or sample rate")
    return float(np.mean(np.abs(w.samples - w_hat.samples))) if len(w) else 0.0


def loss_freq(m: MelFrames, m_hat: MelFrames) -> float:
    """Mean absolute difference over all log-mel cells."""
    if m.frames.shape != m_hat.frames.shape or m.config != m_hat.config:
        raise ValidationError("mel-spectrograms differ in shape or configuration")
    return float(np.mean(np.abs(m.frames - m_hat.frames)))


def recon_loss(lt: float, lf: float, lp: float = 0.0, weights: LossWeights | None = None) -> float:
    weights = weights or LossWeights()
    _check_scalars(lt, lf, lp)
    return weights.time * lt + weights.freq * lf + weights.perceptual * lp


def zero_perceptual(w: Waveform, w_hat: Waveform) -> float:
    return 0.0


def reconstruction_loss(w: Waveform, w_hat: Waveform, weights: LossWeights | None = None,
                        perceptual: Callable[[Waveform, Waveform], float] = zero_perceptual, mel_cfg=None) -> float:
    from .audio import mel_spectrogram

    lt = loss_time(w, w_hat)
    lf = loss_freq(mel_spectrogram(w, mel_cfg), mel_spectrogram(w_hat, mel_cfg))
    return recon_loss(lt, lf, perceptual(w, w_hat), weights)


def joint_loss(l_d: float, l_p: float, l_e: float, l_dec: float) -> float:
    _check_scalars(l_d, l_p, l_e, l_dec)
    return l_d + l_p + l_e + l_dec


# -- training -----------------------------------------------------------------


@dataclass(frozen=True)
class PhonemeTargets:
    """Per-token regression targets (pitch/energy already span-averaged)."""

    duration: np.ndarray
    pitch: np.ndarray
    energy: np.ndarray


def phoneme_targets(feats: ProsodyFeatures) -> PhonemeTargets:
    return PhonemeTargets(
        feats.durations.astype(np.float64),
        span_average(feats.pitch, feats.durations),
        span_average(feats.energy, feats.durations),
    )


@dataclass(frozen=True)
class TrainConfig:
    steps: int = 2000
    lr: float = 0.1
    window: int = 2
    seed: int = 0
    init_scale: float = 0.01
    standardize: bool = True


def predictor_losses(params, X, targets: PhonemeTargets) -> tuple[float, float, float]:
    _, d, p, e = _forward(params, X)
    return (float(np.mean((d - targets.duration) ** 2)),
            float(np.mean((p - targets.pitch) ** 2)),
            float(np.mean((e - targets.energy) ** 2)))


def total_loss(params, X, targets: PhonemeTargets) -> float:
    return sum(predictor_losses(params, X, targets))


def loss_gradients(params, X, targets: PhonemeTargets) -> dict[str, np.ndarray]:
    """Analytic gradients of the summed mean-squared losses."""
    n = X.shape[0]
    z_d, d, p, e = _forward(params, X)
    g_d = 2.0 / n * (d - targets.duration) * sigmoid(z_d)
    g_p = 2.0 / n * (p - targets.pitch)
    g_e = 2.0 / n * (e - targets.energy)
    return {
        "dur_w": X.T @ g_d, "dur_b": np.array([g_d.sum()]),
        "pitch_w": X.T @ g_p, "pitch_b": np.array([g_p.sum()]),
        "energy_w": X.T @ g_e, "energy_b": np.array([g_e.sum()]),
    }


def fit_predictors(model: ProsodyPredictor, X: np.ndarray, targets: PhonemeTargets,
                   steps: int, lr: float, history: list | None = None) -> ProsodyPredictor:
    """Full-batch gradient descent; returns a new model."""
    model = model.copy()
    with np.errstate(over="ignore", invalid="ignore"):
        _descend(model, X, targets, steps, lr, history)
    return model


def _descend(model, X, targets, steps, lr, history):
    for _ in range(steps):
        if history is not None:
            history.append(total_loss(model.params, X, targets))
        grads = loss_gradients(model.params, X, targets)
        for k in PARAM_NAMES:
            model.params[k] -= lr * grads[k]
        if not all(np.all(np.isfinite(v)) for v in model.params.values()):
            raise ValidationError(f"training diverged at lr={lr}; lower the learning rate")
    if history is not None:
        history.append(total_loss(model.params, X, targets))


def _stats(values: np.ndarray) -> tuple[float, float]:
    mu = float(values.mean())
    sd = float(values.std())
    return mu, sd if sd > 0 else 1.0


def assemble(dataset, vocab_size: int, window: int):
    """Stack representation rows, styles and targets for a whole dataset."""
    rows, dur, pitch, energy = [], [], [], []
    style_dim = None
    for seq, style, feats in dataset:
        ids = _ids(seq)
        style = np.asarray(style, dtype=np.float64)
        if style_dim is None:
            style_dim = style.size
        elif style.size != style_dim:
            raise ValidationError("style vectors differ in dimension")
        t = feats if isinstance(feats, PhonemeTargets) else phoneme_targets(feats)
        if not (len(t.duration) == len(t.pitch) == len(t.energy) == ids.size):
            raise ValidationError(f"targets cover {len(t.duration)} tokens, sequence has {ids.size}")
        rows.append(model_inputs(contextual_representation(ids, vocab_size, window), style))
        dur.append(t.duration)
        pitch.append(t.pitch)
        energy.append(t.energy)
    X = np.vstack(rows)
    targets = PhonemeTargets(np.concatenate(dur), np.concatenate(pitch), np.concatenate(energy))
    for arr in (targets.duration, targets.pitch, targets.energy):
        if not np.all(np.isfinite(arr)):
            raise ValidationError("non-finite training targets")
    return X, targets, style_dim


def train_predictors(dataset: Sequence, vocab_size: int, cfg: TrainConfig | None = None,
                     history: list | None = None) -> ProsodyPredictor:
    """Train the three predictors independently by gradient descent on MSE.

    ``dataset`` items are ``(ids, style, targets)`` where targets are
    :class:`ProsodyFeatures` (frame-level, reduced per phoneme) or
    :class:`PhonemeTargets`.
    """
    cfg = cfg or TrainConfig()
    if not dataset:
        raise ValidationError("empty training set")
    X, targets, style_dim = assemble(dataset, vocab_size, cfg.window)
    model = ProsodyPredictor.random(vocab_size, cfg.window, style_dim, cfg.seed, cfg.init_scale)
    if cfg.standardize:
        model.pitch_stats = _stats(targets.pitch)
        model.energy_stats = _stats(targets.energy)
    scaled = PhonemeTargets(
        targets.duration,
        (targets.pitch - model.pitch_stats[0]) / model.pitch_stats[1],
        (targets.energy - model.energy_stats[0]) / model.energy_stats[1],
    )
    trained = fit_predictors(model, X, scaled, cfg.steps, cfg.lr, history)
    return trained


# -- decoder-loss hook and joint objective -------------------------------------


def linear_readout_decoder_loss(mel: MelFrames, durations, pitch, energy) -> float:
    """``loss_freq`` between ``mel`` and its least-squares linear readout.

    Per-token pitch and energy are repeated over the ground-truth duration
    spans; the readout maps ``[pitch, energy, 1]`` per frame to mel bands.
    """
    durations = np.asarray(durations, dtype=np.int64)
    if durations.sum() != mel.n_frames:
        raise ValidationError("durations do not cover the mel frames")
    feats = np.stack([np.repeat(pitch, durations), np.repeat(energy, durations), np.ones(mel.n_frames)], axis=1)
    coef, *_ = np.linalg.lstsq(feats, mel.frames, rcond=None)
    return loss_freq(mel, MelFrames(feats @ coef, mel.config))


def joint_objective(model: ProsodyPredictor, ids, style, feats: ProsodyFeatures, mel: MelFrames,
                    decoder_loss=linear_readout_decoder_loss) -> dict[str, float]:
    """Evaluate every term of the joint loss for one utterance."""
    rep = contextual_representation(ids, model.vocab_size, model.window)
    d, p, e = predict_prosody(rep, style, model)
    t = phoneme_targets(feats)
    l_d = float(np.mean((d - t.duration) ** 2))
    l_p = float(np.mean((p - t.pitch) ** 2))
    l_e = float(np.mean((e - t.energy) ** 2))
    l_dec = float(decoder_loss(mel, feats.durations, p, e))
    return {"duration": l_d, "pitch": l_p, "energy": l_e, "decoder": l_dec,
            "joint": joint_loss(l_d, l_p, l_e, l_dec)}


@dataclass(frozen=True)
class PhonemeEmbedding:
    """Lookup table from token id to a dense vector."""

    table: np.ndarray

    @classmethod
    def random(cls, vocab_size: int, dim: int, seed: int = 0) -> "PhonemeEmbedding":
        rng = np.random.default_rng(seed)
        return cls(rng.normal(0.0, 1.0 / np.sqrt(dim), (vocab_size, dim)))

    def __call__(self, ids) -> np.ndarray:
        return self.table[_ids(ids)]


# -- serialization ------------------------------------------------------------


def save_model(model: ProsodyPredictor, path) -> None:
    """Binary layout (little-endian): magic, u16 version, u32 vocab_size,
    u32 window, u32 style_dim, 4 x f64 (pitch mean/scale, energy mean/scale),
    then per parameter in fixed order u32 rows, u32 cols and f64 row-major data.
    """
    buf = bytearray(MODEL_MAGIC)
    buf += struct.pack("<HIII", MODEL_VERSION, model.vocab_size, model.window, model.style_dim)
    buf += struct.pack("<4d", *model.pitch_stats, *model.energy_stats)
    for k in PARAM_NAMES:
        arr = np.atleast_2d(np.asarray(model.params[k], dtype="<f8"))
        buf += struct.pack("<II", *arr.shape) + arr.tobytes(order="C")
    Path(path).write_bytes(bytes(buf))


def load_model(path) -> ProsodyPredictor:
    data = Path(path).read_bytes()
    if data[:8] != MODEL_MAGIC:
        raise ParseError("not a prosody model file", path=path)
    try:
        version, vocab, window, style_dim = struct.unpack_from("<HIII", data, 8)
        if version != MODEL_VERSION:
            raise ParseError(f"unsupported model version {version}", path=path)
        pos = 8 + struct.calcsize("<HIII")
        pm, ps, em, es = struct.unpack_from("<4d", data, pos)
        pos += 32
        m = ProsodyPredictor(vocab, window, style_dim, {}, (pm, ps), (em, es))
        for k in PARAM_NAMES:
            rows, cols = struct.unpack_from("<II", data, pos)
            pos += 8
            arr = np.frombuffer(data, dtype="<f8", count=rows * cols, offset=pos).reshape(rows, cols)
            pos += 8 * rows * cols
            m.params[k] = arr.reshape(-1).astype(np.float64)
    except (struct.error, ValueError) as exc:
        raise ParseError(f"truncated model file: {exc}", path=path) from None
    if pos != len(data):
        raise ParseError("trailing bytes in model file", path=path)
    if m.params["dur_w"].size != m.input_dim:
        raise ParseError("parameter shapes do not match header dims", path=path)
    return m
