"""Command-line entry point: ``thaifront <command> ...``.

Option values resolve in this order: explicit flag, ``THAIFRONT_<NAME>``
environment variable, ``--config`` file (flat ``key = value``), built-in
default. Logs go to stderr as ``level=... event=... key=value`` lines.

Exit codes: 0 success, 1 usage, 2 data error, 3 internal error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__, corpus_io, evaluation, pipeline
from .audio import MelConfig, PitchConfig, ProsodyFeatures, UtteranceFeatures, extract_features, phoneme_durations, read_wav
from .corpus_io import DEFAULT_PAUSE_TAG, nfc
from .encoding import build_vocab, save_vocab
from .errors import ParseError, ThaiFrontError, ValidationError
from .pauses import save_pause_model, train_pause_model
from .pipeline import PipelineConfig, log_event
from .prosody import TrainConfig, save_model, train_predictors
from .segmentation import build_trie, grapheme_clusters

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3
ENV_PREFIX = "THAIFRONT_"


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class Opt:
    type: type
    default: object = None
    help: str = ""


# Every option shares one namespace so a config file or environment variable
# means the same thing for every command.
OPTIONS: dict[str, Opt] = {
    "lexicon": Opt(str, None, "lexicon file (word[TAB freq])"),
    "vocab": Opt(str, None, "vocab TSV"),
    "pause_model": Opt(str, None, "pause model file"),
    "exceptions": Opt(str, None, "exception dictionary (phoneme-tone TSV)"),
    "annotations": Opt(str, None, "phoneme-tone annotations used as fallback"),
    "rules_table": Opt(str, None, "tone rules TSV overriding the bundled table"),
    "pause_tag": Opt(str, DEFAULT_PAUSE_TAG, "pause tag literal"),
    "separator": Opt(str, pipeline.DEFAULT_SEP, "token separator"),
    "seg_mode": Opt(str, "default", "segmentation cost: default or frequency"),
    "threshold": Opt(float, None, "pause decision threshold"),
    "window": Opt(int, 2, "context window in tokens"),
    "corpus": Opt(str, None, "pause-annotated corpus"),
    "model": Opt(str, None, "model file"),
    "out": Opt(str, None, "output path"),
    "manifest": Opt(str, None, "audio manifest (JSON lines)"),
    "features": Opt(str, None, "feature directory written by 'features'"),
    "encoded": Opt(str, None, "encoded ids, one utterance per line"),
    "steps": Opt(int, 2000, "gradient steps"),
    "lr": Opt(float, 0.1, "learning rate"),
    "seed": Opt(int, 0, "random seed"),
    "style_dim": Opt(int, 32, "style vector dimension"),
    "fft_size": Opt(int, 1024, "FFT size"),
    "hop": Opt(int, 256, "hop length in samples"),
    "win": Opt(int, 1024, "window length in samples"),
    "n_mels": Opt(int, 80, "mel bands"),
    "fmin": Opt(float, 0.0, "mel low edge (Hz)"),
    "fmax": Opt(float, 12000.0, "mel high edge (Hz)"),
    "pitch_fmin": Opt(float, 60.0, "lowest pitch (Hz)"),
    "pitch_fmax": Opt(float, 400.0, "highest pitch (Hz)"),
    "task": Opt(str, None, "metric: wer, cer, stoi, sim or seg"),
    "ref": Opt(str, None, "reference file"),
    "hyp": Opt(str, None, "hypothesis file"),
    "report": Opt(str, None, "write a JSON report here"),
    "emit_stages": Opt(str, None, "directory for intermediate stage files"),
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _add(p: argparse.ArgumentParser, *names: str) -> None:
    for name in names:
        opt = OPTIONS[name]
        flag = "--" + name.replace("_", "-")
        aliases = [flag]
        if name == "pause_tag":
            aliases.append("--tag")
        if name == "separator":
            aliases.append("--sep")
        shown = f" (default: {opt.default})" if opt.default is not None else ""
        p.add_argument(*aliases, dest=name, default=None, help=opt.help + shown)


def build_parser() -> argparse.ArgumentParser:
    root = _Parser(prog="thaifront", description="Thai TTS front-end tools.")
    root.add_argument("--version", action="version", version=f"thaifront {__version__}")
    common = _Parser(add_help=False)
    common.add_argument("--config", default=None, help="flat key = value config file")
    common.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = root.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("segment", parents=[common], help="split text into lexicon words")
    _add(p, "lexicon", "separator", "pause_tag", "seg_mode")

    p = sub.add_parser("pauses", help="train or apply the pause model")
    ps = p.add_subparsers(dest="action", parser_class=_Parser)
    q = ps.add_parser("train", parents=[common], help="estimate a pause model from tagged text")
    _add(q, "corpus", "lexicon", "out", "window", "threshold", "pause_tag")
    q = ps.add_parser("predict", parents=[common], help="insert pause tags")
    _add(q, "model", "lexicon", "threshold", "pause_tag")

    p = sub.add_parser("g2p", parents=[common], help="tokens to phoneme-tone TSV")
    _add(p, "exceptions", "rules_table", "annotations", "separator", "pause_tag")

    p = sub.add_parser("encode", parents=[common], help="phoneme-tone TSV to token ids")
    _add(p, "vocab")

    p = sub.add_parser("vocab", help="build a vocab from annotations")
    vs = p.add_subparsers(dest="action", parser_class=_Parser)
    q = vs.add_parser("build", parents=[common])
    _add(q, "annotations", "out")

    p = sub.add_parser("features", parents=[common], help="extract acoustic features")
    _add(p, "manifest", "out", "encoded", "fft_size", "hop", "win", "n_mels", "fmin", "fmax",
         "pitch_fmin", "pitch_fmax", "style_dim")

    p = sub.add_parser("train", parents=[common], help="train the prosody predictors")
    _add(p, "features", "encoded", "out", "steps", "lr", "seed", "window", "vocab")

    p = sub.add_parser("eval", parents=[common], help="score hypotheses against references")
    _add(p, "task", "ref", "hyp", "report", "separator")

    p = sub.add_parser("pipeline", parents=[common], help="raw text to token ids")
    _add(p, "lexicon", "vocab", "pause_model", "exceptions", "annotations", "rules_table",
         "pause_tag", "threshold", "separator", "seg_mode", "emit_stages")
    p.add_argument("--strict", action="store_true", help="stop at the first failing line")

    p = sub.add_parser("validate", parents=[common], help="check a pipeline config")
    _add(p, "lexicon", "vocab", "pause_model", "exceptions", "annotations", "rules_table",
         "pause_tag", "threshold", "seg_mode")
    return root


def resolve(args: argparse.Namespace, environ=None) -> dict:
    """Merge flags, environment and config file into one settings dict."""
    environ = os.environ if environ is None else environ
    file_values = {}
    config = getattr(args, "config", None) or environ.get(ENV_PREFIX + "CONFIG")
    if config:
        file_values = pipeline.load_config_file(config)
        unknown = sorted(set(file_values) - set(OPTIONS))
        if unknown:
            raise ParseError(f"unknown config key(s): {', '.join(unknown)}", path=config)
    out = {}
    for name, opt in OPTIONS.items():
        if not hasattr(args, name):
            continue
        raw = getattr(args, name)
        if raw is None:
            raw = environ.get(ENV_PREFIX + name.upper())
        if raw is None:
            raw = file_values.get(name)
        if raw is None:
            out[name] = opt.default
            continue
        try:
            out[name] = opt.type(raw)
        except ValueError:
            raise UsageError(f"--{name.replace('_', '-')}: expected {opt.type.__name__}, got {raw!r}") from None
    return out


def _require(s: dict, *names: str) -> None:
    missing = [n for n in names if not s.get(n)]
    if missing:
        raise UsageError("missing required option(s): " + ", ".join("--" + n.replace("_", "-") for n in missing))


def _stdin_lines() -> list[str]:
    return [nfc(l) for l in sys.stdin.read().splitlines()]


def _write_lines(lines, stream=None) -> None:
    stream = stream or sys.stdout
    stream.write("".join(l + "\n" for l in lines))


def _pipeline_config(s: dict) -> PipelineConfig:
    return PipelineConfig.from_mapping({k: s.get(k) for k in PipelineConfig().to_mapping()})


# -- commands -------------------------------------------------------------------


def cmd_segment(s: dict) -> int:
    _require(s, "lexicon")
    trie = build_trie(corpus_io.load_lexicon(s["lexicon"]))
    out = [s["separator"].join(pipeline.stage_segment(l, trie, s["pause_tag"], s["seg_mode"])) for l in _stdin_lines()]
    _write_lines(out)
    return EXIT_OK


def cmd_pauses_train(s: dict) -> int:
    _require(s, "corpus", "lexicon", "out")
    trie = build_trie(corpus_io.load_lexicon(s["lexicon"]))
    corpus = [c for c in corpus_io.load_pause_corpus(s["corpus"], s["pause_tag"]) if c.raw_text]
    threshold = 0.5 if s["threshold"] is None else s["threshold"]
    model = train_pause_model(corpus, trie, s["window"], threshold)
    save_pause_model(model, s["out"])
    log_event("pause_model_saved", path=s["out"], signatures=len(model.boundary_scores), prior=round(model.prior, 6))
    return EXIT_OK


def cmd_pauses_predict(s: dict) -> int:
    _require(s, "model", "lexicon")
    cfg = _pipeline_config({**s, "pause_model": s["model"]})
    res = pipeline.load_resources(cfg, need_vocab=False)
    _write_lines(pipeline.stage_pauses(l, res.pause_model, res.trie, s["pause_tag"]) for l in _stdin_lines())
    return EXIT_OK


def cmd_g2p(s: dict) -> int:
    cfg = _pipeline_config(s)
    exceptions = pipeline.exception_dict(corpus_io.load_phoneme_tone_annotations(cfg.exceptions)) if cfg.exceptions else {}
    fallback = pipeline.annotation_fallback(corpus_io.load_phoneme_tone_annotations(cfg.annotations)) if cfg.annotations else None
    rules = pipeline.load_tone_rules(cfg.rules_table) if cfg.rules_table else pipeline.default_tone_rules()
    failed = 0
    out = []
    for lineno, line in enumerate(_stdin_lines(), 1):
        tokens = line.split(cfg.separator) if line else []
        try:
            out.append(pipeline.stage_g2p(tokens, cfg.pause_tag, exceptions, fallback, rules, cfg.separator).render())
        except ThaiFrontError as exc:
            failed += 1
            log_event("stage_error", logging.ERROR, line=lineno, stage="g2p", message=str(exc))
            out.append(f"{line}\t")
    _write_lines(out)
    return EXIT_DATA if failed else EXIT_OK


def cmd_encode(s: dict) -> int:
    _require(s, "vocab")
    vocab = pipeline.load_vocab(s["vocab"])
    out = []
    for lineno, line in enumerate(_stdin_lines(), 1):
        utt = corpus_io.parse_utterance_line(line, lineno, "<stdin>")
        out.append(pipeline.stage_encode(utt, vocab))
    _write_lines(out)
    return EXIT_OK


def cmd_vocab_build(s: dict) -> int:
    _require(s, "annotations", "out")
    vocab = build_vocab(corpus_io.load_phoneme_tone_annotations(s["annotations"]))
    save_vocab(vocab, s["out"])
    log_event("vocab_saved", path=s["out"], size=len(vocab), base=len(vocab.base_tokens))
    return EXIT_OK


def _read_encoded(path) -> list[list[int]]:
    rows = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        try:
            rows.append([int(t) for t in line.split()])
        except ValueError:
            raise corpus_io.ParseError("expected space-separated integer ids", lineno, path) from None
    return rows


def _resolve_path(base: Path, p: str) -> Path:
    q = Path(p)
    return q if q.is_absolute() else base / q


def cmd_features(s: dict) -> int:
    _require(s, "manifest", "out")
    manifest = Path(s["manifest"])
    records = corpus_io.load_manifest(manifest)
    encoded = _read_encoded(s["encoded"]) if s["encoded"] else None
    if encoded is not None and len(encoded) != len(records):
        raise ValidationError(f"{len(encoded)} encoded lines for {len(records)} manifest records")
    out = Path(s["out"])
    out.mkdir(parents=True, exist_ok=True)
    pcfg = PitchConfig(s["pitch_fmin"], s["pitch_fmax"])
    index = []
    for i, rec in enumerate(records):
        w = read_wav(_resolve_path(manifest.parent, rec.audio_path))
        if w.sample_rate != rec.sample_rate:
            raise ValidationError(f"{rec.audio_path}: file rate {w.sample_rate} != manifest rate {rec.sample_rate}")
        cfg = MelConfig(w.sample_rate, s["fft_size"], s["hop"], s["win"], s["n_mels"], s["fmin"],
                        min(s["fmax"], w.sample_rate / 2))
        alignment = None
        n_ph = None
        if rec.alignment_path:
            alignment = corpus_io.load_alignment(_resolve_path(manifest.parent, rec.alignment_path))
        elif encoded is not None and encoded[i]:
            n_ph = len(encoded[i])
        feats = extract_features(w, cfg, pcfg, s["style_dim"], n_ph, alignment)
        name = f"{i:06d}.feat"
        corpus_io.write_feature_record(out / name, feats.sections())
        index.append(f"{name}\t{rec.audio_path}")
        log_event("features", index=i, frames=feats.mel.n_frames, audio=rec.audio_path)
    (out / "index.tsv").write_text("".join(l + "\n" for l in index), encoding="utf-8")
    return EXIT_OK


def load_feature_index(directory) -> list[UtteranceFeatures]:
    d = Path(directory)
    names = [l.split("\t")[0] for l in (d / "index.tsv").read_text(encoding="utf-8").splitlines() if l]
    return [UtteranceFeatures.from_sections(corpus_io.read_feature_record(d / n)) for n in names]


def training_set(feats: list[UtteranceFeatures], encoded: list[list[int]]) -> list:
    if len(feats) != len(encoded):
        raise ValidationError(f"{len(encoded)} encoded lines for {len(feats)} feature records")
    data = []
    for i, (f, ids) in enumerate(zip(feats, encoded)):
        if not ids:
            log_event("skip_utterance", logging.WARNING, index=i, reason="empty id sequence")
            continue
        n = f.mel.n_frames
        d = f.durations if f.durations is not None and len(f.durations) == len(ids) else phoneme_durations(len(ids), n)
        data.append((ids, f.style, ProsodyFeatures(d, f.pitch, f.energy)))
    return data


def cmd_train(s: dict) -> int:
    _require(s, "features", "encoded", "out")
    encoded = _read_encoded(s["encoded"])
    data = training_set(load_feature_index(s["features"]), encoded)
    if s["vocab"]:
        vocab_size = len(pipeline.load_vocab(s["vocab"]))
    else:
        vocab_size = 1 + max((max(ids) for ids, _, _ in data), default=0)
    cfg = TrainConfig(steps=s["steps"], lr=s["lr"], window=s["window"], seed=s["seed"])
    history: list[float] = []
    model = train_predictors(data, vocab_size, cfg, history)
    save_model(model, s["out"])
    log_event("model_saved", path=s["out"], utterances=len(data), vocab_size=vocab_size,
              initial_loss=f"{history[0]:.6g}" if history else "nan", final_loss=f"{history[-1]:.6g}" if history else "nan")
    return EXIT_OK


def _paired_lines(ref, hyp) -> list[tuple[str, str]]:
    r = Path(ref).read_text(encoding="utf-8").splitlines()
    h = Path(hyp).read_text(encoding="utf-8").splitlines()
    if len(r) != len(h):
        raise ValidationError(f"reference has {len(r)} lines, hypothesis has {len(h)}")
    return [(nfc(a), nfc(b)) for a, b in zip(r, h)]


def _split(line: str, sep: str | None) -> list[str]:
    return line.split() if sep is None else [t for t in line.split(sep) if t]


def evaluate(task: str, ref: str, hyp: str, sep: str | None = None) -> dict:
    """Per-item scores plus a corpus aggregate for one metric."""
    items: list[dict] = []
    agg: dict = {}
    if task in ("wer", "cer"):
        edits = total = 0
        for i, (a, b) in enumerate(_paired_lines(ref, hyp)):
            ra, rb = (_split(a, sep), _split(b, sep)) if task == "wer" else (grapheme_clusters(a), grapheme_clusters(b))
            rate, ops = evaluation.wer(ra, rb)
            items.append({"index": i, "rate": rate, "substitutions": ops.substitutions,
                          "insertions": ops.insertions, "deletions": ops.deletions, "ref_len": len(ra)})
            edits += ops.distance
            total += len(ra)
        agg = {"rate": edits / total if total else 0.0, "edits": edits, "ref_len": total}
    elif task == "stoi":
        pairs = _paired_lines(ref, hyp)
        base_r, base_h = Path(ref).parent, Path(hyp).parent
        for i, (a, b) in enumerate(pairs):
            score = evaluation.stoi(read_wav(_resolve_path(base_r, a)), read_wav(_resolve_path(base_h, b)))
            items.append({"index": i, "stoi": score})
        agg = {"mean": float(np.mean([x["stoi"] for x in items])) if items else 0.0}
    elif task == "sim":
        for i, (a, b) in enumerate(_paired_lines(ref, hyp)):
            try:
                va, vb = [float(x) for x in a.split()], [float(x) for x in b.split()]
            except ValueError:
                raise corpus_io.ParseError("expected whitespace-separated floats", i + 1) from None
            items.append({"index": i, "cosine": evaluation.cosine_sim(va, vb)})
        agg = {"mean": float(np.mean([x["cosine"] for x in items])) if items else 0.0}
    elif task == "seg":
        sep = sep or pipeline.DEFAULT_SEP
        tp = n_pred = n_gold = 0
        for i, (a, b) in enumerate(_paired_lines(ref, hyp)):
            g, p = _split(a, sep), _split(b, sep)
            prec, rec, f = evaluation.segmentation_f1(g, p)
            items.append({"index": i, "precision": prec, "recall": rec, "f1": f})
            gb, pb = evaluation.boundaries(g), evaluation.boundaries(p)
            tp += len(gb & pb)
            n_pred += len(pb)
            n_gold += len(gb)
        prec = tp / n_pred if n_pred else float(n_gold == 0)
        rec = tp / n_gold if n_gold else float(n_pred == 0)
        agg = {"precision": prec, "recall": rec, "f1": 2 * prec * rec / (prec + rec) if prec + rec else 0.0}
    else:
        raise UsageError(f"unknown task {task!r}; choose wer, cer, stoi, sim or seg")
    return {"task": task, "config": {"ref": str(ref), "hyp": str(hyp), "separator": sep}, "items": items, "aggregate": agg}


def cmd_eval(s: dict, explicit_sep: bool) -> int:
    _require(s, "task", "ref", "hyp")
    sep = s["separator"] if explicit_sep or s["task"] == "seg" else None
    report = evaluate(s["task"], s["ref"], s["hyp"], sep)
    if s["report"]:
        Path(s["report"]).write_text(json.dumps(report, ensure_ascii=False, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    _write_lines(f"{k}={v}" for k, v in sorted(report["aggregate"].items()))
    return EXIT_OK


STAGE_FILES = {"pauses": "pauses.txt", "segment": "segment.txt", "g2p": "g2p.tsv", "encode": "encode.txt"}


def cmd_pipeline(s: dict, strict: bool) -> int:
    cfg = _pipeline_config(s)
    report = pipeline.validate_config(cfg)
    for field_name, msg in report.warnings:
        log_event("config_warning", logging.WARNING, field=field_name, message=msg)
    if not report.ok:
        for field_name, msg in report.failures:
            log_event("config_failure", logging.ERROR, field=field_name, message=msg)
        return EXIT_DATA
    results = pipeline.run_pipeline(_stdin_lines(), cfg, strict=strict)
    _write_lines(r.ids for r in results)
    if s["emit_stages"]:
        d = Path(s["emit_stages"])
        d.mkdir(parents=True, exist_ok=True)
        for stage, name in STAGE_FILES.items():
            (d / name).write_text("".join(r.stage_text(stage, cfg.separator) + "\n" for r in results), encoding="utf-8")
    failed = sum(r.error is not None for r in results)
    log_event("pipeline_done", lines=len(results), failed=failed)
    return EXIT_DATA if failed else EXIT_OK


def cmd_validate(s: dict) -> int:
    report = pipeline.validate_config(_pipeline_config(s))
    for field_name, msg in report.failures:
        print(f"failure\t{field_name}\t{msg}")
    for field_name, msg in report.warnings:
        print(f"warning\t{field_name}\t{msg}")
    if report.ok:
        print("ok")
    return EXIT_OK if report.ok else EXIT_DATA


# -- entry point ------------------------------------------------------------------


def _setup_logging(verbose: bool) -> None:
    log = logging.getLogger("thaifront")
    log.handlers.clear()
    h = logging.StreamHandler(sys.stderr)
    h.setFormatter(logging.Formatter("level=%(levelname)s %(message)s"))
    log.addHandler(h)
    log.setLevel(logging.DEBUG if verbose else logging.INFO)
    log.propagate = False


def dispatch(args: argparse.Namespace) -> int:
    s = resolve(args)
    cmd = args.command
    if cmd == "segment":
        return cmd_segment(s)
    if cmd == "pauses":
        if args.action == "train":
            return cmd_pauses_train(s)
        if args.action == "predict":
            return cmd_pauses_predict(s)
        raise UsageError("pauses: choose 'train' or 'predict'")
    if cmd == "g2p":
        return cmd_g2p(s)
    if cmd == "encode":
        return cmd_encode(s)
    if cmd == "vocab":
        if args.action == "build":
            return cmd_vocab_build(s)
        raise UsageError("vocab: choose 'build'")
    if cmd == "features":
        return cmd_features(s)
    if cmd == "train":
        return cmd_train(s)
    if cmd == "eval":
        return cmd_eval(s, args.separator is not None)
    if cmd == "pipeline":
        return cmd_pipeline(s, args.strict)
    if cmd == "validate":
        return cmd_validate(s)
    raise UsageError("no command given; see --help")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    _setup_logging(getattr(args, "verbose", False))
    try:
        return dispatch(args)
    except UsageError as exc:
        log_event("usage_error", logging.ERROR, message=str(exc))
        return EXIT_USAGE
    except (ThaiFrontError, OSError, UnicodeDecodeError, EOFError) as exc:
        log_event("data_error", logging.ERROR, kind=type(exc).__name__, message=str(exc))
        return EXIT_DATA
    except Exception as exc:  # noqa: BLE001
        log_event("internal_error", logging.CRITICAL, kind=type(exc).__name__, message=str(exc))
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
