"""Synthetic two-domain specificity corpora with a known latent specificity.

Sentences are built from a shared set of function words and numbers plus a
domain-specific content vocabulary (source and target vocabularies are
disjoint). Each content word has a Zipfian corpus probability and an idf of
``-ln p``. The latent specificity of a sentence is a fixed increasing
function of three of its shallow features: log token count, numeric-token
density and average idf. Source sentences get binary labels by mapping the
latent value onto the 0..6 "generality" scale and binarizing with the usual
thresholds; target sentences keep the real latent value for evaluation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from specadapt.corpusio import (
    EmbeddingTable,
    IdfTable,
    LabeledExample,
    LexiconResources,
    binarize_source_rating,
    tokenize,
)
from specadapt.features import extract_features

FUNCTION_WORDS = (
    "the a an of to in on and or but is was are be it this that with for as at by "
    "from he she they we you i not"
).split()
VOCAB_SIZE = 1500
EMB_DIM = 32
STOPWORD_PROB = 0.3

# weights of the latent score on (log n_tokens, numeric density, mean idf);
# the offset/scale below standardize it on the source domain
W_LEN, W_NUM, W_IDF = 1.0, 3.0, 0.6
LATENT_MEAN, LATENT_STD = 0.417, 0.227


@dataclass
class Domain:
    name: str
    words: list
    probs: np.ndarray
    min_len: int
    max_len: int


def make_domain(name: str, prefix: str, rng: np.random.Generator, min_len=4, max_len=30):
    ranks = np.arange(1, VOCAB_SIZE + 1)
    probs = 1.0 / ranks
    probs /= probs.sum()
    # distinct pseudo-words so tokenization keeps them whole
    words = [f"{prefix}{i:04d}" for i in rng.permutation(VOCAB_SIZE)]
    return Domain(name, words, probs, min_len, max_len)


def word_idf(domain: Domain):
    return {w: float(-math.log(p)) for w, p in zip(domain.words, domain.probs)}


def make_idf(*domains) -> IdfTable:
    values = {}
    for d in domains:
        values.update(word_idf(d))
    # function words and punctuation are frequent; numbers moderately rare
    for w in FUNCTION_WORDS:
        values[w] = 1.0
    values["."] = 0.0
    return IdfTable(values=values, default=8.0)


def sample_raw(domain: Domain, rng: np.random.Generator) -> str:
    n = int(rng.integers(domain.min_len, domain.max_len + 1))
    numeric = rng.beta(1.0, 5.0)
    rare = rng.random()
    tokens = []
    for _ in range(n - 1):
        u = rng.random()
        if u < numeric:
            tokens.append(str(int(rng.integers(1, 2000))))
        elif u < numeric + STOPWORD_PROB * (1 - numeric):
            tokens.append(FUNCTION_WORDS[int(rng.integers(len(FUNCTION_WORDS)))])
        elif rng.random() < rare:
            tokens.append(domain.words[int(rng.integers(VOCAB_SIZE // 2, VOCAB_SIZE))])
        else:
            tokens.append(domain.words[int(rng.choice(VOCAB_SIZE, p=domain.probs))])
    return " ".join(tokens) + " ."


def raw_latent(sentence, lexicons: LexiconResources) -> float:
    f = extract_features(sentence, lexicons)
    return W_LEN * math.log(f.n_tokens) + W_NUM * f.n_numbers_norm + W_IDF * f.idf_avg


class LatentFunction:
    """Increasing map from three shallow features to specificity in [0, 1]."""

    def __init__(self, lexicons: LexiconResources, offset: float, scale: float):
        self.lexicons = lexicons
        self.offset = offset
        self.scale = scale

    def __call__(self, sentence) -> float:
        z = (raw_latent(sentence, self.lexicons) - self.offset) / self.scale
        return float(np.clip(LATENT_MEAN + LATENT_STD * z, 0.0, 1.0))


@dataclass
class SyntheticTask:
    source: list  # LabeledExample, binary
    target_unlabeled: list  # Sentence
    target_test: list  # LabeledExample, real
    embeddings: EmbeddingTable
    lexicons: LexiconResources
    latent: LatentFunction


def make_task(seed=0, n_source=2000, n_target=2000, n_test=500) -> SyntheticTask:
    rng = np.random.default_rng(seed)
    src_dom = make_domain("source", "s", rng)
    tgt_dom = make_domain("target", "t", rng)
    lexicons = LexiconResources(stopwords=FUNCTION_WORDS, idf=make_idf(src_dom, tgt_dom))

    # calibrate the latent map on a separate source sample
    calib = [tokenize(sample_raw(src_dom, rng)) for _ in range(3000)]
    z = np.array([raw_latent(s, lexicons) for s in calib])
    latent = LatentFunction(lexicons, float(z.mean()), float(z.std()))

    source = []
    while len(source) < n_source:
        s = tokenize(sample_raw(src_dom, rng))
        label = binarize_source_rating(6.0 * (1.0 - latent(s)))
        if label is not None:
            source.append(LabeledExample(s, label, "binary", "source"))
    target = [tokenize(sample_raw(tgt_dom, rng)) for _ in range(n_target)]
    test = []
    for _ in range(n_test):
        s = tokenize(sample_raw(tgt_dom, rng))
        test.append(LabeledExample(s, latent(s), "real", "target"))

    words = sorted(set(src_dom.words) | set(tgt_dom.words) | set(FUNCTION_WORDS) | {"."})
    vectors = rng.normal(0.0, 1.0 / math.sqrt(EMB_DIM), (len(words), EMB_DIM))
    return SyntheticTask(source, target, test, EmbeddingTable(words, vectors), lexicons, latent)
