import csv

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from specadapt.corpusio import LexiconResources, compute_idf, tokenize
from specadapt.exceptions import DimensionMismatch, ModelStateError
from specadapt.features import (
    FEATURE_NAMES,
    N_FEATURES,
    FeatureStats,
    ShallowFeatureExtractor,
    count_connectives,
    extract_features,
    feature_matrix,
    is_number,
    is_punctuation,
    standardize_features,
    write_features_csv,
)

words = st.from_regex(r"[A-Za-z]{1,8}|[0-9]{1,4}|[.,!?;]", fullmatch=True)
sentences = st.lists(words, min_size=1, max_size=15).map(" ".join)


def test_slot_order():
    assert N_FEATURES == 14
    assert FEATURE_NAMES[0] == "n_tokens" and FEATURE_NAMES[-1] == "idf_avg"


def test_hand_example():
    r = LexiconResources(stopwords={"the"})
    f = extract_features(tokenize("The cat sat."), r)
    assert f.n_tokens == 4
    assert f.n_punct_norm == 0.25
    assert f.stopword_frac == 0.25
    assert f.avg_word_chars == 2.5
    assert f.n_capitals_norm == 0.25


def test_single_number():
    assert extract_features(tokenize("7"), LexiconResources()).n_numbers_norm == 1.0


def test_empty_lexicons_give_zero():
    f = extract_features(tokenize("Nice happy dog"), LexiconResources())
    assert f.polarity_frac == 0 and f.avg_familiarity == 0 and f.avg_imageability == 0
    assert f.n_connectives == 0


def test_lexicon_means_only_over_hits():
    r = LexiconResources(familiarity={"dog": 600.0, "cat": 400.0}, imageability={"dog": 2.0})
    f = extract_features(tokenize("Dog and cat"), r)
    assert f.avg_familiarity == 500.0
    assert f.avg_imageability == 2.0


def test_idf_stats_with_default():
    idf = compute_idf(["a b", "a c", "a d", "e"])
    f = extract_features(tokenize("a zzz"), LexiconResources(idf=idf))
    assert f.idf_min == idf["a"]
    assert f.idf_max == idf.default
    assert f.idf_avg == pytest.approx((idf["a"] + idf.default) / 2)


def test_connectives_greedy_multiword():
    conn = {"because", "as a result", "as"}
    assert count_connectives("as a result of rain , as usual".split(), conn) == 2
    assert count_connectives("because because".split(), conn) == 2


@pytest.mark.parametrize("tok,num", [("7", True), ("3.14", True), ("1,000", True), ("-2", True),
                                     ("abc", False), ("7th", False), (".", False)])
def test_is_number(tok, num):
    assert is_number(tok) is num


def test_is_punctuation():
    assert is_punctuation(".") and is_punctuation("$") and is_punctuation("\u2014")
    assert not is_punctuation("a")


@given(sentences)
def test_invariants(raw):
    idf = compute_idf([raw, "other words here"])
    r = LexiconResources(stopwords={"the", "a"}, polarity_words={"good"}, idf=idf)
    f = extract_features(tokenize(raw), r)
    v = f.as_array()
    assert np.all(np.isfinite(v))
    for name in ("stopword_frac", "polarity_frac", "subjective_frac", "n_numbers_norm",
                 "n_punct_norm"):
        assert 0.0 <= getattr(f, name) <= 1.0
    assert f.idf_min <= f.idf_avg + 1e-12 and f.idf_avg <= f.idf_max + 1e-12
    n = f.n_tokens
    non_stop = sum(t.casefold() not in r.stopwords for t in tokenize(raw).tokens) / n
    assert f.stopword_frac + non_stop == 1.0


@given(sentences)
def test_punctuation_count_monotone(raw):
    r = LexiconResources()
    before = extract_features(tokenize(raw), r)
    after = extract_features(tokenize(raw + " !"), r)
    assert after.n_punct_norm * after.n_tokens >= before.n_punct_norm * before.n_tokens


class TestStandardize:
    def test_formula(self):
        stats = FeatureStats(mean=np.array([2.0]), std=np.array([2.0]))
        assert standardize_features([[4.0]], stats)[0, 0] == 1.0
        assert standardize_features([[2.0]], stats)[0, 0] == 0.0

    def test_constant_slot(self):
        stats = FeatureStats.fit([[3.0, 1.0], [3.0, 2.0]])
        assert stats.std[0] == 1.0
        assert standardize_features([[3.0, 1.5]], stats)[0, 0] == 0.0

    def test_missing_stats(self):
        with pytest.raises(ModelStateError):
            standardize_features([[1.0]], None)

    def test_width_mismatch(self):
        with pytest.raises(DimensionMismatch):
            standardize_features([[1.0, 2.0]], FeatureStats(np.zeros(3), np.ones(3)))

    def test_training_features_are_standard(self):
        rng = np.random.default_rng(0)
        raw = [" ".join(rng.choice(["the", "cat", "7", ".", "Big"], size=rng.integers(1, 12)))
               for _ in range(200)]
        X = feature_matrix(raw, LexiconResources(stopwords={"the"}))
        Z = standardize_features(X, FeatureStats.fit(X))
        varying = X.std(axis=0) > 0
        np.testing.assert_allclose(Z.mean(axis=0), 0, atol=1e-6)
        np.testing.assert_allclose(Z.std(axis=0)[varying], 1, atol=1e-6)


def test_extractor_estimator(tmp_path):
    sents = ["The cat sat.", "A dog ran 3 miles!", "Hello"]
    ext = ShallowFeatureExtractor(LexiconResources(stopwords={"the", "a"}))
    Z = ext.fit(sents).transform(sents)
    assert Z.shape == (3, N_FEATURES)
    assert list(ext.get_feature_names_out()) == list(FEATURE_NAMES)
    assert ext.get_params()["standardize"] is True
    with pytest.raises(ModelStateError):
        ShallowFeatureExtractor().transform(sents)

    write_features_csv(tmp_path / "f.csv", sents, LexiconResources())
    with open(tmp_path / "f.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["sentence", *FEATURE_NAMES]
    assert len(rows) == 4
