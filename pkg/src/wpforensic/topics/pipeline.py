"""End-to-end topic pipeline: filter, reduce, cluster, describe, label."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from ..corpus import ArticleKey, Sentence, tokenize
from .clustering import OUTLIER, ClusterAssignment, hdbscan
from .embeddings import EmbeddingMatrix
from .keywords import ctfidf, mmr_diversify
from .reduce import reduce_dimensions

logger = logging.getLogger(__name__)

MIN_SENTENCE_TOKENS = 5


@dataclass
class TopicInfo:
    label: int
    size: int
    keywords: list[tuple[str, float]]
    name: str


@dataclass
class TopicModel:
    topics: dict[int, TopicInfo]
    params: dict = field(default_factory=dict)


def filter_sentences(
    sentences: list[Sentence], min_tokens: int = MIN_SENTENCE_TOKENS
) -> list[Sentence]:
    """Drop sentences shorter than ``min_tokens`` raw tokens."""
    return [s for s in sentences if s.token_count >= min_tokens]


def name_topic(keywords: list[str]) -> str:
    """Join the top three keywords into a display name."""
    return ", ".join(keywords[:3])


def build_topic_model(
    sentences: list[Sentence],
    sentence_matrix: EmbeddingMatrix,
    term_matrix: EmbeddingMatrix | None = None,
    *,
    min_cluster_size: int = 25,
    min_samples: int | None = None,
    reduced_dim: int = 5,
    reduce_method: str = "pca",
    diversity: float = 0.5,
    top_n_keywords: int = 10,
    candidate_pool: int = 30,
) -> tuple[ClusterAssignment, TopicModel]:
    """Cluster sentence embeddings and describe each cluster.

    ``sentence_matrix`` row ids must be exactly the sentence keys.
    Clustering runs on a ``reduced_dim`` projection; topic vectors are
    the mean of member rows in the *original* embedding space, so they
    stay comparable to term vectors from the same embedding model.
    Keywords are the MMR-diversified selection from each cluster's top
    ``candidate_pool`` class-TF-IDF terms.
    """
    keys = [s.key for s in sentences]
    if len(set(keys)) != len(keys):
        raise ValueError("duplicate sentence keys")
    if set(keys) != set(sentence_matrix.ids):
        missing = set(keys) - set(sentence_matrix.ids)
        extra = set(sentence_matrix.ids) - set(keys)
        raise ValueError(
            f"embedding ids do not match sentence keys "
            f"({len(missing)} missing, {len(extra)} extra)"
        )

    reduced = reduce_dimensions(sentence_matrix, reduced_dim, reduce_method)
    assignment = hdbscan(reduced, min_cluster_size, min_samples)

    row_of = sentence_matrix.row_index()
    cluster_tokens: dict[int, list[str]] = {}
    cluster_keys: dict[int, list[str]] = {}
    for sentence in sentences:
        label = assignment.labels[sentence.key]
        if label == OUTLIER:
            continue
        cluster_keys.setdefault(label, []).append(sentence.key)
        cluster_tokens.setdefault(label, []).extend(tokenize(sentence.text, "analysis"))

    candidates_by_label = ctfidf(cluster_tokens)
    term_vectors: dict[str, np.ndarray] = {}
    if term_matrix is not None:
        term_vectors = {tid: term_matrix.rows[i] for i, tid in enumerate(term_matrix.ids)}

    topics: dict[int, TopicInfo] = {}
    for label in sorted(cluster_keys):
        scored = candidates_by_label.get(label, [])
        weight_of = dict(scored)
        pool = [t for t, _ in scored[:candidate_pool]]
        if not pool:
            logger.warning("cluster %d produced no candidate terms", label)
            topics[label] = TopicInfo(label, len(cluster_keys[label]), [], "")
            continue
        member_rows = [row_of[k] for k in cluster_keys[label]]
        topic_vector = sentence_matrix.rows[member_rows].astype(np.float64).mean(axis=0)
        picks = mmr_diversify(
            pool, term_vectors, topic_vector, diversity=diversity, top_n=top_n_keywords
        )
        keywords = [(t, weight_of[t]) for t in picks]
        topics[label] = TopicInfo(
            label, len(cluster_keys[label]), keywords, name_topic(picks)
        )

    params = {
        "min_cluster_size": min_cluster_size,
        "min_samples": min_samples if min_samples is not None else min_cluster_size,
        "reduced_dim": reduced_dim,
        "reduce_method": reduce_method,
        "diversity": diversity,
        "top_n_keywords": top_n_keywords,
        "candidate_pool": candidate_pool,
        "sentence_count": len(sentences),
        "outlier_count": len(assignment.outliers()),
    }
    return assignment, TopicModel(topics, params)


def label_articles(
    assignment: ClusterAssignment, sentences: list[Sentence]
) -> dict[ArticleKey, set[int]]:
    """Article key -> set of topic labels its sentences landed in.

    Outlier sentences contribute nothing; an article whose sentences
    are all outliers maps to the empty set.
    """
    out: dict[ArticleKey, set[int]] = {}
    for sentence in sentences:
        key = (sentence.site_id, sentence.post_id)
        bucket = out.setdefault(key, set())
        label = assignment.labels[sentence.key]
        if label != OUTLIER:
            bucket.add(label)
    return out
