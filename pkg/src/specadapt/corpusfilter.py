"""Specificity-based filtering of (context, response) corpora and lexical diversity."""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .corpusio import tokenize
from .exceptions import DimensionMismatch, EmptyCorpus, EmptySentence

logger = logging.getLogger(__name__)

DEFAULT_MIN_LEN = 5


def _n_tokens(text: str) -> int:
    try:
        return len(tokenize(text).tokens)
    except EmptySentence:
        return 0


def filter_least_specific(examples: Sequence, scores, keep_n: int) -> list:
    """Keep the ``keep_n`` highest-scoring examples in their original order.

    Ties at the cut go to the earlier example.
    """
    scores = np.asarray(scores, dtype=np.float64).reshape(-1)
    if len(examples) != scores.shape[0]:
        raise DimensionMismatch(f"{len(examples)} examples vs {scores.shape[0]} scores")
    keep_n = int(keep_n)
    if not 0 <= keep_n <= len(examples):
        raise ValueError(f"keep_n must lie in [0, {len(examples)}], got {keep_n}")
    # stable sort on -score keeps earlier indices first among equals
    order = np.argsort(-scores, kind="stable")
    kept = np.sort(order[:keep_n])
    return [examples[i] for i in kept]


def filter_short(examples: Sequence, min_len: int = DEFAULT_MIN_LEN) -> list:
    """Keep examples whose response has at least ``min_len`` tokens."""
    if min_len < 0:
        raise ValueError("min_len must be nonnegative")
    return [ex for ex in examples if _n_tokens(ex[1]) >= min_len]


def ngrams(tokens: Sequence[str], order: int):
    return [tuple(tokens[i:i + order]) for i in range(len(tokens) - order + 1)]


def diversity(corpus, order: int = 1) -> float:
    """Distinct n-grams over total n-grams, pooled across the corpus.

    ``corpus`` is an iterable of token sequences; n-grams never span two
    sequences.
    """
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    grams = [g for toks in corpus for g in ngrams(list(toks), order)]
    if not grams:
        raise EmptyCorpus(f"corpus has no {order}-grams")
    return len(set(grams)) / len(grams)


@dataclass
class FilterReport:
    kept_n: int
    removed_n: int
    unigram_diversity: float
    bigram_diversity: float


def response_tokens(examples):
    out = []
    for _, response in examples:
        try:
            out.append(tokenize(response).tokens)
        except EmptySentence:
            out.append(())
    return out


def report(kept: Sequence, n_total: int) -> FilterReport:
    toks = response_tokens(kept)

    def _div(order):
        try:
            return diversity(toks, order)
        except EmptyCorpus:
            return float("nan")

    return FilterReport(len(kept), n_total - len(kept), _div(1), _div(2))


def read_pairs(path) -> list:
    """Read ``context<TAB>response`` lines; malformed lines raise ValueError."""
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n").rstrip("\r")
            if not line.strip():
                logger.warning("%s:%d: skipping blank line", path, lineno)
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected context<TAB>response")
            pairs.append((parts[0], parts[1]))
    return pairs


def write_pairs(path, examples) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for context, response in examples:
            fh.write(f"{context}\t{response}\n")


def write_report(path, rep: FilterReport) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, delimiter="\t", lineterminator="\n")
        w.writerow(("kept_n", "removed_n", "unigram_diversity", "bigram_diversity"))
        w.writerow((rep.kept_n, rep.removed_n, f"{rep.unigram_diversity:.6f}",
                    f"{rep.bigram_diversity:.6f}"))
