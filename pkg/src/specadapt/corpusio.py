"""Reading corpora, embeddings and lexicons; rating conversions and idf tables."""

from __future__ import annotations

import hashlib
import logging
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .exceptions import (
    DimensionMismatch,
    EmptyCorpus,
    EmptySentence,
    InvalidRating,
    ParseError,
)

logger = logging.getLogger(__name__)

# numbers first so "3.5" and "1,000" stay whole; then words with inner
# apostrophes; then any single non-space, non-word character
_TOKEN_RE = re.compile(r"\d+(?:[.,]\d+)*|\w+(?:['’]\w+)*|[^\w\s]")

GENERAL = 0
SPECIFIC = 1
SOURCE = "source"
TARGET = "target"


@dataclass(frozen=True)
class Sentence:
    raw: str
    tokens: tuple

    def __len__(self):
        return len(self.tokens)

    def __str__(self):
        return self.raw


def tokenize(raw: str) -> Sentence:
    """Split ``raw`` on whitespace and split punctuation off into separate tokens.

    The original string is stored untouched on the returned :class:`Sentence`.

    >>> tokenize("The cat sat.").tokens
    ('The', 'cat', 'sat', '.')
    """
    if not isinstance(raw, str):
        raise TypeError(f"expected str, got {type(raw).__name__}")
    tokens = tuple(_TOKEN_RE.findall(raw))
    if not tokens:
        raise EmptySentence(f"no tokens in {raw!r}")
    return Sentence(raw=raw, tokens=tokens)


def as_sentence(x) -> Sentence:
    return x if isinstance(x, Sentence) else tokenize(x)


@dataclass(frozen=True)
class LabeledExample:
    sentence: Sentence
    label: float
    kind: str  # "binary" or "real"
    domain: str = SOURCE

    def __post_init__(self):
        if self.kind == "binary":
            if self.label not in (0, 1):
                raise InvalidRating(f"binary label must be 0 or 1, got {self.label}")
            if self.domain != SOURCE:
                raise ValueError("binary labels are only allowed on source sentences")
        elif self.kind == "real":
            if not 0.0 <= self.label <= 1.0:
                raise InvalidRating(f"real label must lie in [0, 1], got {self.label}")
        else:
            raise ValueError(f"unknown label kind {self.kind!r}")


def rescale_rating(rating: int) -> float:
    """Map a 1..5 crowd rating onto {0, 0.25, 0.5, 0.75, 1}."""
    if isinstance(rating, bool) or rating not in (1, 2, 3, 4, 5):
        raise InvalidRating(f"rating must be an integer in 1..5, got {rating!r}")
    return (int(rating) - 1) / 4.0


def binarize_source_rating(avg_rating: float) -> Optional[int]:
    """Binarize an average rating on the 0..6 scale (higher = more general).

    Returns ``GENERAL`` (0) above 3.5, ``SPECIFIC`` (1) below 2.5 and ``None``
    for ratings in the excluded middle band.
    """
    if not (0.0 <= avg_rating <= 6.0):
        raise InvalidRating(f"average rating must lie in [0, 6], got {avg_rating!r}")
    if avg_rating > 3.5:
        return GENERAL
    if avg_rating < 2.5:
        return SPECIFIC
    return None


@dataclass(frozen=True)
class IdfTable:
    values: dict
    default: float

    def __getitem__(self, token):
        return self.values.get(token.casefold(), self.default)

    def __len__(self):
        return len(self.values)


def compute_idf(corpus: Iterable) -> IdfTable:
    """Document frequencies over ``corpus`` where each sentence is one document.

    ``idf(t) = max(0, ln(N / (1 + df(t))))``; unseen tokens get ``ln(N)``.
    Tokens are case-folded.
    """
    df = Counter()
    n = 0
    for s in corpus:
        s = as_sentence(s)
        n += 1
        df.update({t.casefold() for t in s.tokens})
    if n == 0:
        raise EmptyCorpus("cannot compute idf on an empty corpus")
    values = {t: max(0.0, math.log(n / (1.0 + c))) for t, c in df.items()}
    return IdfTable(values=values, default=math.log(n))


def read_idf(path) -> IdfTable:
    """Read ``token<TAB>idf`` lines. The default for unseen tokens is the table maximum."""
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ParseError("expected token<TAB>idf", lineno)
            try:
                v = float(parts[1])
            except ValueError:
                raise ParseError(f"bad idf value {parts[1]!r}", lineno) from None
            if not math.isfinite(v) or v < 0:
                raise ParseError(f"idf must be finite and nonnegative, got {v}", lineno)
            values[parts[0].casefold()] = v
    if not values:
        raise EmptyCorpus(f"no idf entries in {path}")
    return IdfTable(values=values, default=max(values.values()))


class EmbeddingTable:
    """Word vectors with a mean-vector fallback for unknown tokens.

    Lookups try the exact token first, then its case-folded form.
    """

    def __init__(self, words: Sequence[str], vectors):
        vectors = np.asarray(vectors, dtype=np.float64)
        if vectors.ndim != 2 or vectors.shape[0] != len(words):
            raise DimensionMismatch(
                f"expected {len(words)} vectors, got array of shape {vectors.shape}")
        if vectors.shape[0] == 0:
            raise EmptyCorpus("embedding table has no vectors")
        self.words = list(words)
        self.index = {w: i for i, w in enumerate(self.words)}
        for w in self.words:
            self.index.setdefault(w.casefold(), self.index[w])
        self.dimension = vectors.shape[1]
        self.unk_vector = vectors.mean(axis=0)
        # last row is the unknown-word vector
        self.matrix = np.vstack([vectors, self.unk_vector[None, :]])
        self.unk_index = len(self.words)

    def __len__(self):
        return len(self.words)

    def __contains__(self, token):
        return token in self.index or token.casefold() in self.index

    @property
    def vocabulary(self):
        return {w: self.matrix[i] for i, w in enumerate(self.words)}

    def token_index(self, token: str) -> int:
        i = self.index.get(token)
        if i is None:
            i = self.index.get(token.casefold(), self.unk_index)
        return i

    def lookup(self, token: str) -> np.ndarray:
        return self.matrix[self.token_index(token)].copy()

    def encode(self, tokens: Sequence[str]) -> np.ndarray:
        return np.fromiter((self.token_index(t) for t in tokens), dtype=np.int64,
                           count=len(tokens))

    def embed(self, tokens: Sequence[str]) -> np.ndarray:
        return self.matrix[self.encode(tokens)]

    def vocab_hash(self) -> str:
        h = hashlib.sha256()
        h.update(f"{len(self.words)} {self.dimension}\n".encode())
        h.update("\n".join(self.words).encode("utf-8"))
        h.update(np.ascontiguousarray(self.matrix[:-1], dtype="<f8").tobytes())
        return h.hexdigest()


def load_embeddings(path) -> EmbeddingTable:
    """Load a word2vec-style text file: a ``V D`` header then ``token v1 .. vD`` per line."""
    words, rows = [], []
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise ParseError("header must be 'V D'", 1)
        try:
            n_words, dim = int(header[0]), int(header[1])
        except ValueError:
            raise ParseError("header must hold two integers", 1) from None
        if dim <= 0:
            raise ParseError("dimension must be positive", 1)
        for lineno, line in enumerate(fh, 2):
            parts = line.rstrip("\n").rstrip(" ").split(" ")
            if parts == [""]:
                continue
            if len(parts) < 2:
                raise ParseError("expected a token followed by its vector", lineno)
            if len(parts) - 1 != dim:
                raise DimensionMismatch(
                    f"line {lineno}: expected {dim} values, got {len(parts) - 1}")
            try:
                rows.append([float(v) for v in parts[1:]])
            except ValueError:
                raise ParseError("non-numeric vector component", lineno) from None
            words.append(parts[0])
    if len(words) != n_words:
        raise ParseError(f"header announces {n_words} words but file holds {len(words)}")
    return EmbeddingTable(words, np.array(rows, dtype=np.float64).reshape(len(rows), dim))


def save_embeddings(table: EmbeddingTable, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{len(table)} {table.dimension}\n")
        for i, w in enumerate(table.words):
            fh.write(w + " " + " ".join(repr(float(v)) for v in table.matrix[i]) + "\n")


@dataclass
class LexiconResources:
    stopwords: frozenset = frozenset()
    connectives: frozenset = frozenset()
    polarity_words: frozenset = frozenset()
    subjective_words: frozenset = frozenset()
    familiarity: dict = field(default_factory=dict)
    imageability: dict = field(default_factory=dict)
    idf: Optional[IdfTable] = None

    def __post_init__(self):
        for name in ("stopwords", "connectives", "polarity_words", "subjective_words"):
            setattr(self, name, frozenset(w.casefold() for w in getattr(self, name)))
        for name in ("familiarity", "imageability"):
            scores = {k.casefold(): float(v) for k, v in getattr(self, name).items()}
            bad = [k for k, v in scores.items() if not math.isfinite(v)]
            if bad:
                raise ValueError(f"non-finite {name} scores for {bad[:5]}")
            setattr(self, name, scores)

    @property
    def idf_default(self):
        return self.idf.default if self.idf is not None else 0.0

    def to_dict(self):
        return {
            "stopwords": sorted(self.stopwords),
            "connectives": sorted(self.connectives),
            "polarity_words": sorted(self.polarity_words),
            "subjective_words": sorted(self.subjective_words),
            "familiarity": dict(self.familiarity),
            "imageability": dict(self.imageability),
            "idf": None if self.idf is None else dict(self.idf.values),
            "idf_default": None if self.idf is None else self.idf.default,
        }

    @classmethod
    def from_dict(cls, d):
        idf = None if d.get("idf") is None else IdfTable(dict(d["idf"]), float(d["idf_default"]))
        return cls(
            stopwords=d["stopwords"], connectives=d["connectives"],
            polarity_words=d["polarity_words"], subjective_words=d["subjective_words"],
            familiarity=d["familiarity"], imageability=d["imageability"], idf=idf,
        )


_warned_missing = set()


def _warn_missing(kind, path):
    if kind not in _warned_missing:
        _warned_missing.add(kind)
        logger.warning("no %s lexicon available (%s); the feature will be 0", kind, path)


def read_word_set(path, kind="word"):
    if path is None or not Path(path).is_file():
        _warn_missing(kind, path)
        return frozenset()
    with open(path, encoding="utf-8") as fh:
        return frozenset(line.strip() for line in fh if line.strip())


def read_scored_lexicon(path, kind="scored"):
    if path is None or not Path(path).is_file():
        _warn_missing(kind, path)
        return {}
    scores = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ParseError("expected token<TAB>score", lineno)
            try:
                v = float(parts[1])
            except ValueError:
                raise ParseError(f"bad score {parts[1]!r}", lineno) from None
            if not math.isfinite(v):
                raise ParseError("score must be finite", lineno)
            scores[parts[0]] = v
    return scores


def load_lexicons(stopwords=None, connectives=None, polarity=None, subjective=None,
                  familiarity=None, imageability=None, idf=None) -> LexiconResources:
    """Build :class:`LexiconResources` from files. Missing files yield empty lexicons."""
    return LexiconResources(
        stopwords=read_word_set(stopwords, "stopword"),
        connectives=read_word_set(connectives, "connective"),
        polarity_words=read_word_set(polarity, "polarity"),
        subjective_words=read_word_set(subjective, "subjectivity"),
        familiarity=read_scored_lexicon(familiarity, "familiarity"),
        imageability=read_scored_lexicon(imageability, "imageability"),
        idf=read_idf(idf) if idf is not None else None,
    )


@dataclass(frozen=True)
class ReferenceDistribution:
    """Target mean and standard deviation for the posterior regularizer (news defaults)."""

    mu_r: float = 0.417
    sigma_r: float = 0.227

    def __post_init__(self):
        if not 0.0 < self.mu_r < 1.0:
            raise ValueError(f"mu_r must lie in (0, 1), got {self.mu_r}")
        if not self.sigma_r > 0.0:
            raise ValueError(f"sigma_r must be positive, got {self.sigma_r}")


def read_labeled_tsv(path, domain=SOURCE) -> list:
    """Read ``label<TAB>text`` lines.

    Source files must carry 0/1 labels; target (evaluation) files carry reals in [0, 1].
    """
    examples = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n").rstrip("\r")
            if not line.strip():
                continue
            label, sep, text = line.partition("\t")
            if not sep:
                raise ParseError("expected label<TAB>text", lineno)
            try:
                value = float(label)
            except ValueError:
                raise ParseError(f"bad label {label!r}", lineno) from None
            try:
                sentence = tokenize(text)
            except EmptySentence:
                logger.warning("%s:%d: skipping empty sentence", path, lineno)
                continue
            kind = "binary" if domain == SOURCE else "real"
            try:
                examples.append(LabeledExample(sentence, int(value) if kind == "binary"
                                               and value in (0.0, 1.0) else value,
                                               kind, domain))
            except InvalidRating as e:
                raise ParseError(str(e), lineno) from None
    if not examples:
        raise EmptyCorpus(f"no labeled sentences in {path}")
    return examples


def read_unlabeled(path) -> list:
    """One sentence per line; blank lines are skipped with a warning."""
    sentences = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            text = line.rstrip("\n").rstrip("\r")
            try:
                sentences.append(tokenize(text))
            except EmptySentence:
                logger.warning("%s:%d: skipping empty line", path, lineno)
    return sentences
