"""Topic modelling over sentence embeddings.

The pipeline mirrors the classic embed → reduce → cluster → describe
recipe: sentence vectors are loaded from an interchange file pair,
projected to a low-dimensional space, clustered with a density-based
algorithm, and each cluster is described by class-based TF-IDF keywords
diversified with maximal marginal relevance.
"""

from .clustering import OUTLIER, ClusterAssignment, hdbscan
from .embeddings import (
    EmbeddingFormatError,
    EmbeddingMatrix,
    load_embeddings,
    load_embeddings_stem,
    save_embeddings,
    save_embeddings_stem,
)
from .keywords import ctfidf, mmr_diversify
from .pipeline import (
    TopicInfo,
    TopicModel,
    build_topic_model,
    filter_sentences,
    label_articles,
    name_topic,
)
from .reduce import fit_pca, pca_reduce, reduce_dimensions, register_reducer

__all__ = [
    "OUTLIER",
    "ClusterAssignment",
    "EmbeddingFormatError",
    "EmbeddingMatrix",
    "TopicInfo",
    "TopicModel",
    "build_topic_model",
    "ctfidf",
    "filter_sentences",
    "fit_pca",
    "hdbscan",
    "label_articles",
    "load_embeddings",
    "load_embeddings_stem",
    "mmr_diversify",
    "name_topic",
    "pca_reduce",
    "reduce_dimensions",
    "register_reducer",
    "save_embeddings",
    "save_embeddings_stem",
]
