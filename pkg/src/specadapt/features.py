"""Handcrafted shallow specificity features and their standardization."""

from __future__ import annotations

import csv
import re
import unicodedata
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .corpusio import LexiconResources, Sentence, as_sentence
from .exceptions import DimensionMismatch, EmptySentence, ModelStateError

FEATURE_NAMES = (
    "n_tokens",
    "n_numbers_norm",
    "n_capitals_norm",
    "n_punct_norm",
    "avg_word_chars",
    "stopword_frac",
    "n_connectives",
    "polarity_frac",
    "subjective_frac",
    "avg_familiarity",
    "avg_imageability",
    "idf_min",
    "idf_max",
    "idf_avg",
)
N_FEATURES = len(FEATURE_NAMES)

_NUMBER_RE = re.compile(r"[+-]?(?:\d+(?:[.,]\d+)*|\.\d+)")


def is_number(token: str) -> bool:
    return _NUMBER_RE.fullmatch(token) is not None


def is_punctuation(token: str) -> bool:
    return all(unicodedata.category(c)[0] in "PS" for c in token)


def count_connectives(folded: Sequence[str], connectives) -> int:
    """Greedy left-to-right count of (possibly multiword) connectives, longest match first."""
    if not connectives:
        return 0
    phrases = {}
    for c in connectives:
        parts = tuple(c.split())
        if parts:
            phrases.setdefault(len(parts), set()).add(parts)
    lengths = sorted(phrases, reverse=True)
    i = count = 0
    n = len(folded)
    while i < n:
        for k in lengths:
            if i + k <= n and tuple(folded[i:i + k]) in phrases[k]:
                count += 1
                i += k
                break
        else:
            i += 1
    return count


@dataclass(frozen=True)
class ShallowFeatures:
    n_tokens: float
    n_numbers_norm: float
    n_capitals_norm: float
    n_punct_norm: float
    avg_word_chars: float
    stopword_frac: float
    n_connectives: float
    polarity_frac: float
    subjective_frac: float
    avg_familiarity: float
    avg_imageability: float
    idf_min: float
    idf_max: float
    idf_avg: float

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, k) for k in FEATURE_NAMES], dtype=np.float64)


def _lexicon_mean(folded, scores):
    hits = [scores[t] for t in folded if t in scores]
    return float(np.mean(hits)) if hits else 0.0


def extract_features(s, r: LexiconResources) -> ShallowFeatures:
    s = as_sentence(s)
    tokens = s.tokens
    n = len(tokens)
    if n == 0:
        raise EmptySentence("cannot extract features from an empty sentence")
    folded = [t.casefold() for t in tokens]
    if r.idf is not None:
        idf = np.array([r.idf[t] for t in tokens])
    else:
        idf = np.zeros(n)
    return ShallowFeatures(
        n_tokens=float(n),
        n_numbers_norm=sum(map(is_number, tokens)) / n,
        n_capitals_norm=sum(c.isupper() for t in tokens for c in t) / n,
        n_punct_norm=sum(map(is_punctuation, tokens)) / n,
        avg_word_chars=sum(len(t) for t in tokens) / n,
        stopword_frac=sum(t in r.stopwords for t in folded) / n,
        n_connectives=float(count_connectives(folded, r.connectives)),
        polarity_frac=sum(t in r.polarity_words for t in folded) / n,
        subjective_frac=sum(t in r.subjective_words for t in folded) / n,
        avg_familiarity=_lexicon_mean(folded, r.familiarity),
        avg_imageability=_lexicon_mean(folded, r.imageability),
        idf_min=float(idf.min()),
        idf_max=float(idf.max()),
        idf_avg=float(idf.mean()),
    )


def feature_matrix(sentences, r: LexiconResources) -> np.ndarray:
    rows = [extract_features(s, r).as_array() for s in sentences]
    return np.array(rows, dtype=np.float64).reshape(len(rows), N_FEATURES)


@dataclass
class FeatureStats:
    mean: np.ndarray
    std: np.ndarray

    @classmethod
    def fit(cls, X) -> "FeatureStats":
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[0] == 0:
            raise ValueError("need a nonempty 2-d feature matrix")
        std = X.std(axis=0)
        std[std == 0] = 1.0
        return cls(mean=X.mean(axis=0), std=std)

    def to_dict(self):
        return {"mean": self.mean.tolist(), "std": self.std.tolist()}

    @classmethod
    def from_dict(cls, d):
        return cls(mean=np.asarray(d["mean"], dtype=np.float64),
                   std=np.asarray(d["std"], dtype=np.float64))


def standardize_features(X, stats) -> np.ndarray:
    """Per-slot ``(x - mean) / std`` with statistics frozen from the source training set."""
    if stats is None:
        raise ModelStateError("feature standardization statistics are missing")
    X = np.asarray(X, dtype=np.float64)
    if X.shape[-1] != stats.mean.shape[0]:
        raise DimensionMismatch(
            f"feature width {X.shape[-1]} does not match statistics width {stats.mean.shape[0]}")
    return (X - stats.mean) / stats.std


class ShallowFeatureExtractor(TransformerMixin, BaseEstimator):
    """Sentence -> standardized shallow feature matrix.

    ``fit`` freezes per-slot mean and std on the given (source training) sentences.
    """

    def __init__(self, lexicons=None, standardize=True):
        self.lexicons = lexicons
        self.standardize = standardize

    def _resources(self):
        return self.lexicons if self.lexicons is not None else LexiconResources()

    def fit(self, X, y=None):
        raw = feature_matrix(X, self._resources())
        self.stats_ = FeatureStats.fit(raw)
        self.n_features_out_ = N_FEATURES
        return self

    def transform(self, X):
        raw = feature_matrix(X, self._resources())
        if not self.standardize:
            return raw
        return standardize_features(raw, getattr(self, "stats_", None))

    def get_feature_names_out(self, input_features=None):
        return np.array(FEATURE_NAMES, dtype=object)


def write_features_csv(path, sentences, r: LexiconResources) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(("sentence",) + FEATURE_NAMES)
        for s in sentences:
            s = as_sentence(s)
            w.writerow([s.raw] + [repr(float(v)) for v in extract_features(s, r).as_array()])
