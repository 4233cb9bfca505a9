"""scikit-learn style wrapper around :func:`specadapt.trainer.train`."""

from __future__ import annotations

from dataclasses import replace
from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from .augment import NoiseConfig
from .corpusio import EmbeddingTable, LabeledExample, LexiconResources
from .metrics import spearman
from .network import NetworkConfig
from .trainer import TrainingConfig, predict, train
from .validation import check_binary_labels, check_real_labels, check_sentences


class SpecificityRegressor(RegressorMixin, BaseEstimator):
    """Predict real-valued sentence specificity in a target domain.

    ``fit`` takes binary-labeled source sentences and, optionally, unlabeled
    target-domain sentences via ``X_target``. ``predict`` returns teacher
    scores in (0, 1). ``score`` is the Spearman correlation, since the
    quantity of interest is a ranking rather than a calibrated value.

    Parameters
    ----------
    embeddings : EmbeddingTable
        Word vectors; required before ``fit``.
    lexicons : LexiconResources, optional
        Lexicons for the shallow features. Without an idf table one is
        computed from ``X_target``.
    variant : str
        One of ``se``, ``se_d``, ``se_a``, ``se_ad_kl``, ``se_ad_meanstd``,
        ``se_ad_noaug``.
    """

    def __init__(self, embeddings: Optional[EmbeddingTable] = None,
                 lexicons: Optional[LexiconResources] = None, variant="se_ad_meanstd",
                 alpha=0.999, c1=1000.0, c2=None, beta=1.0, batch_size=32, epochs=None,
                 lr=1e-4, mu_r=0.417, sigma_r=0.227, seed=0, noise=None, network=None):
        self.embeddings = embeddings
        self.lexicons = lexicons
        self.variant = variant
        self.alpha = alpha
        self.c1 = c1
        self.c2 = c2
        self.beta = beta
        self.batch_size = batch_size
        self.epochs = epochs
        self.lr = lr
        self.mu_r = mu_r
        self.sigma_r = sigma_r
        self.seed = seed
        self.noise = noise
        self.network = network

    def _config(self) -> TrainingConfig:
        return TrainingConfig(
            variant=self.variant, alpha=self.alpha, c1=self.c1, c2=self.c2, beta=self.beta,
            batch_size=self.batch_size, epochs=self.epochs, lr=self.lr, mu_r=self.mu_r,
            sigma_r=self.sigma_r, seed=self.seed,
            noise=replace(self.noise) if self.noise is not None else NoiseConfig(),
            network=replace(self.network) if self.network is not None else NetworkConfig(),
        )

    def fit(self, X, y, X_target=None, X_dev=None, y_dev=None):
        if self.embeddings is None:
            raise ValueError("SpecificityRegressor needs an EmbeddingTable in `embeddings`")
        sentences = check_sentences(X)
        labels = check_binary_labels(y, len(sentences))
        source = [LabeledExample(s, int(v), "binary", "source")
                  for s, v in zip(sentences, labels)]
        target = check_sentences(X_target, "X_target") if X_target is not None else []
        dev = None
        if X_dev is not None:
            dev_s = check_sentences(X_dev, "X_dev")
            dev_y = check_real_labels(y_dev, len(dev_s))
            dev = [LabeledExample(s, float(v), "real", "target") for s, v in zip(dev_s, dev_y)]
        self.checkpoint_ = train(source, target, self._config(), self.embeddings,
                                 lexicons=self.lexicons, dev=dev)
        self.history_ = self.checkpoint_.history
        return self

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self, "checkpoint_")
        return predict(self.checkpoint_, check_sentences(X), self.embeddings)

    def score(self, X, y, sample_weight=None) -> float:
        if sample_weight is not None:
            raise ValueError("sample_weight is not supported")
        return spearman(self.predict(X), np.asarray(y, dtype=np.float64))
