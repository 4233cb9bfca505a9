"""``specadapt`` command-line interface.

Exit codes: 0 success, 2 input error, 3 training divergence, 4 checkpoint or
embedding mismatch.
"""

from __future__ import annotations

import argparse
import csv
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import corpusfilter, metrics
from .checkpoint import Checkpoint
from .corpusio import (
    SOURCE,
    TARGET,
    load_embeddings,
    load_lexicons,
    read_labeled_tsv,
    read_unlabeled,
    tokenize,
)
from .exceptions import (
    DivergenceError,
    EmptySentence,
    ModelStateError,
    ParseError,
    SpecAdaptError,
)
from .trainer import TrainingConfig, predict, train

logger = logging.getLogger("specadapt")

EXIT_OK, EXIT_INPUT, EXIT_DIVERGED, EXIT_STATE = 0, 2, 3, 4

LOG_COLUMNS = ("epoch", "l_ce", "l_u", "l_d", "total", "dev_spearman", "dev_tau", "dev_mae")
PATH_KEYS = ("source", "target", "embeddings", "dev", "out", "idf", "stopwords",
             "connectives", "polarity", "subjective", "familiarity", "imageability")
# options whose default is None still need a parser
_NONE_TYPES = {"c2": float, "epochs": int}


class InputError(SpecAdaptError):
    """Bad command-line input; maps to exit code 2."""


def _parse_bool(text: str) -> bool:
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _option_types() -> dict:
    types = {}
    for key, default in TrainingConfig().to_flat().items():
        if default is None:
            types[key] = _NONE_TYPES[key]
        elif isinstance(default, bool):
            types[key] = _parse_bool
        else:
            types[key] = type(default)
    return types


def read_config(path) -> dict:
    """Parse a flat ``key = value`` file; ``#`` starts a comment."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep or not key.strip():
                raise ParseError("expected key = value", lineno)
            out[key.strip().replace("-", "_")] = value.strip()
    return out


def write_config(path, values: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for key in sorted(values):
            if values[key] is not None:
                fh.write(f"{key} = {values[key]}\n")


def resolve_train_options(args, types=None) -> tuple[TrainingConfig, dict]:
    """Merge CLI flags, config file, ``SPECADAPT_SEED`` and defaults, in that order."""
    types = types or _option_types()
    from_file = read_config(args.config) if args.config else {}
    unknown = set(from_file) - set(types) - set(PATH_KEYS)
    if unknown:
        raise InputError(f"unknown config keys: {', '.join(sorted(unknown))}")

    options, paths = {}, {}
    for key in PATH_KEYS:
        value = getattr(args, key, None)
        paths[key] = value if value is not None else from_file.get(key)
    for key, conv in types.items():
        cli_value = getattr(args, key, None)
        if cli_value is not None:
            options[key] = cli_value
        elif key in from_file:
            try:
                options[key] = conv(from_file[key])
            except ValueError as e:
                raise InputError(f"config key {key}: {e}") from None
        elif key == "seed" and os.environ.get("SPECADAPT_SEED"):
            try:
                options[key] = int(os.environ["SPECADAPT_SEED"])
            except ValueError:
                raise InputError("SPECADAPT_SEED must be an integer") from None
    cfg = TrainingConfig.from_flat({**TrainingConfig().to_flat(), **options})
    return cfg, paths


def _require(paths, *keys):
    for key in keys:
        if not paths.get(key):
            raise InputError(f"missing required option --{key.replace('_', '-')}")
        if key != "out" and not Path(paths[key]).exists():
            raise InputError(f"{key} file not found: {paths[key]}")


def cmd_train(args) -> int:
    cfg, paths = resolve_train_options(args)
    _require(paths, "source", "embeddings", "out")
    for key in PATH_KEYS:
        if key not in ("out",) and paths.get(key) and not Path(paths[key]).exists():
            raise InputError(f"{key} file not found: {paths[key]}")

    source = read_labeled_tsv(paths["source"], SOURCE)
    target = read_unlabeled(paths["target"]) if paths.get("target") else []
    dev = read_labeled_tsv(paths["dev"], TARGET) if paths.get("dev") else None
    embeddings = load_embeddings(paths["embeddings"])
    lexicons = load_lexicons(**{k: paths.get(k) for k in (
        "stopwords", "connectives", "polarity", "subjective", "familiarity",
        "imageability", "idf")})

    out = Path(paths["out"])
    out.mkdir(parents=True, exist_ok=True)
    ckpt = train(source, target, cfg, embeddings, lexicons=lexicons, dev=dev)
    ckpt.save(out / "model.pt")
    with open(out / "train_log.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(LOG_COLUMNS)
        for row in ckpt.history:
            w.writerow([row["epoch"]] + [_fmt(row.get(k, float("nan")))
                                         for k in LOG_COLUMNS[1:]])
    write_config(out / "config.txt", {**cfg.to_flat(), **paths})
    print(f"wrote {out / 'model.pt'}")
    return EXIT_OK


def _fmt(v) -> str:
    return "nan" if v is None or not np.isfinite(v) else f"{v:.6g}"


def _read_lines(path):
    """Non-blank lines of a text file, warning about each skipped blank line."""
    kept = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            text = line.rstrip("\n").rstrip("\r")
            if not text.strip():
                print(f"warning: {path}:{lineno}: skipping empty line", file=sys.stderr)
                continue
            kept.append(text)
    return kept


def _write_scores(path, sentences, scores) -> None:
    fh = sys.stdout if path in (None, "-") else open(path, "w", encoding="utf-8", newline="")
    try:
        for s, v in zip(sentences, scores):
            fh.write(f"{s}\t{v:.4f}\n")
    finally:
        if fh is not sys.stdout:
            fh.close()


def cmd_predict(args) -> int:
    ckpt = Checkpoint.load(args.checkpoint)
    embeddings = load_embeddings(args.embeddings)
    lines = _read_lines(args.input)
    scores = predict(ckpt, lines, embeddings)
    _write_scores(args.output, lines, scores)
    return EXIT_OK


def read_predictions(path):
    """``sentence<TAB>score`` rows, as written by ``predict``."""
    sentences, scores = [], []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n").rstrip("\r")
            if not line.strip():
                continue
            text, sep, score = line.rpartition("\t")
            if not sep:
                raise ParseError(f"{path}: expected sentence<TAB>score", lineno)
            try:
                scores.append(float(score))
            except ValueError:
                raise ParseError(f"{path}: bad score {score!r}", lineno) from None
            sentences.append(text)
    return sentences, np.array(scores, dtype=np.float64)


def join_predictions(pred_sentences, pred_scores, gold):
    """Align predictions with gold examples by sentence text, else by line index."""
    by_text = {}
    for s, v in zip(pred_sentences, pred_scores):
        by_text.setdefault(s, v)
    texts = [ex.sentence.raw for ex in gold]
    if all(t in by_text for t in texts):
        return np.array([by_text[t] for t in texts])
    if len(pred_scores) == len(gold):
        return np.asarray(pred_scores)
    raise InputError(f"cannot join {len(pred_scores)} predictions with {len(gold)} gold rows")


def cmd_eval(args) -> int:
    sentences, scores = read_predictions(args.predictions)
    gold = read_labeled_tsv(args.gold, TARGET)
    pred = join_predictions(sentences, scores, gold)
    result = metrics.evaluate(pred, [ex.label for ex in gold])
    for k, v in result.items():
        print(f"{k}\t{v:.4f}")
    if args.output:
        metrics.write_report(args.output, result, len(gold))
    return EXIT_OK


def length_baseline(sentences) -> np.ndarray:
    """Token counts min-max scaled to [0, 1]; all 0.5 when every length is equal."""
    lengths = np.array([len(tokenize(s).tokens) for s in sentences], dtype=np.float64)
    if lengths.size == 0:
        return lengths
    lo, hi = lengths.min(), lengths.max()
    if hi == lo:
        return np.full_like(lengths, 0.5)
    return (lengths - lo) / (hi - lo)


def cmd_baseline_length(args) -> int:
    lines = _read_lines(args.input)
    _write_scores(args.output, lines, length_baseline(lines))
    return EXIT_OK


def cmd_filter(args) -> int:
    pairs = corpusfilter.read_pairs(args.corpus)
    if args.mode == "short":
        kept = corpusfilter.filter_short(pairs, args.min_len)
    else:
        if args.keep_n is None:
            raise InputError("--mode general needs --keep-n")
        if not (args.checkpoint and args.embeddings):
            raise InputError("--mode general needs --checkpoint and --embeddings")
        ckpt = Checkpoint.load(args.checkpoint)
        embeddings = load_embeddings(args.embeddings)
        scores = np.full(len(pairs), -np.inf)
        scorable = []
        for i, (_, response) in enumerate(pairs):
            try:
                tokenize(response)
                scorable.append(i)
            except EmptySentence:
                pass
        if scorable:
            scores[scorable] = predict(ckpt, [pairs[i][1] for i in scorable], embeddings)
        kept = corpusfilter.filter_least_specific(pairs, scores, args.keep_n)
    corpusfilter.write_pairs(args.output, kept)
    rep = corpusfilter.report(kept, len(pairs))
    if args.report:
        corpusfilter.write_report(args.report, rep)
    print(f"kept {rep.kept_n}, removed {rep.removed_n}, "
          f"distinct-1 {rep.unigram_diversity:.4f}, distinct-2 {rep.bigram_diversity:.4f}")
    return EXIT_OK


def cmd_hist(args) -> int:
    _, scores = read_predictions(args.predictions)
    if scores.size == 0:
        raise InputError(f"no predictions in {args.predictions}")
    hist = metrics.histogram(scores, args.bins)
    metrics.write_histogram_csv(args.output, hist)
    print(f"gaussian_mean\t{hist.mean:.6f}\ngaussian_std\t{hist.std:.6f}")
    return EXIT_OK


def _add_train_options(p):
    p.add_argument("--config", help="flat 'key = value' run config")
    for key in PATH_KEYS:
        p.add_argument(f"--{key}", help=f"{key} path")
    for key, conv in _option_types().items():
        if key in ("source", "target"):
            continue
        flag = f"--{key.replace('_', '-')}"
        p.add_argument(flag, dest=key, type=conv, default=None,
                       help=f"override training option {key}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="specadapt", description="Cross-domain sentence specificity prediction.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a model; writes model.pt, train_log.csv, config.txt")
    _add_train_options(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="score one sentence per line with the teacher network")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--embeddings", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--output", help="TSV output (default stdout)")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("eval", help="Spearman, Kendall tau-b and MAE against gold labels")
    p.add_argument("--predictions", required=True, help="sentence<TAB>score TSV")
    p.add_argument("--gold", required=True, help="label<TAB>text TSV")
    p.add_argument("--output", help="write the metric report here")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("baseline-length", help="min-max scaled token-count baseline")
    p.add_argument("--input", required=True)
    p.add_argument("--output", help="TSV output (default stdout)")
    p.set_defaults(func=cmd_baseline_length)

    p = sub.add_parser("filter", help="filter a context<TAB>response corpus")
    p.add_argument("--mode", choices=("short", "general"), required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--report", help="diversity report TSV")
    p.add_argument("--min-len", type=int, default=corpusfilter.DEFAULT_MIN_LEN)
    p.add_argument("--keep-n", type=int)
    p.add_argument("--checkpoint")
    p.add_argument("--embeddings")
    p.set_defaults(func=cmd_filter)

    p = sub.add_parser("hist", help="histogram of predictions plus a fitted Gaussian")
    p.add_argument("--predictions", required=True)
    p.add_argument("--bins", type=int, default=10)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_hist)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except DivergenceError as e:
        print(f"error: training diverged: {e}", file=sys.stderr)
        return EXIT_DIVERGED
    except ModelStateError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_STATE
    except (OSError, ValueError, SpecAdaptError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
