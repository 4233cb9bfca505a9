"""Input checks shared by the estimator and the training entry points."""

from __future__ import annotations

import numpy as np

from .corpusio import Sentence, as_sentence
from .exceptions import DimensionMismatch, EmptyCorpus, InvalidRating


def check_sentences(X, name="X") -> list:
    """Coerce an iterable of raw strings or :class:`Sentence` objects to sentences."""
    if isinstance(X, (str, Sentence)):
        raise TypeError(f"{name} must be a sequence of sentences, not a single sentence")
    out = [as_sentence(x) for x in X]
    if not out:
        raise EmptyCorpus(f"{name} is empty")
    return out


def check_binary_labels(y, n: int) -> np.ndarray:
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    if y.shape[0] != n:
        raise DimensionMismatch(f"{n} sentences vs {y.shape[0]} labels")
    if not np.all((y == 0) | (y == 1)):
        raise InvalidRating("labels must be 0 (general) or 1 (specific)")
    return y.astype(np.int64)


def check_real_labels(y, n: int) -> np.ndarray:
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    if y.shape[0] != n:
        raise DimensionMismatch(f"{n} sentences vs {y.shape[0]} labels")
    if not np.all(np.isfinite(y)) or np.any((y < 0) | (y > 1)):
        raise InvalidRating("real-valued labels must lie in [0, 1]")
    return y
