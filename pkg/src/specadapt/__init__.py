"""Real-valued sentence specificity across domains with self-ensembling."""

from .corpusio import (
    EmbeddingTable,
    LabeledExample,
    LexiconResources,
    ReferenceDistribution,
    Sentence,
    binarize_source_rating,
    compute_idf,
    load_embeddings,
    load_lexicons,
    rescale_rating,
    tokenize,
)
from .estimator import SpecificityRegressor
from .trainer import TrainingConfig, predict, train

__version__ = "0.1.0"

__all__ = [
    "EmbeddingTable",
    "LabeledExample",
    "LexiconResources",
    "ReferenceDistribution",
    "Sentence",
    "SpecificityRegressor",
    "TrainingConfig",
    "binarize_source_rating",
    "compute_idf",
    "load_embeddings",
    "load_lexicons",
    "predict",
    "rescale_rating",
    "tokenize",
    "train",
]
