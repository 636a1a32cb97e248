"""Topic pipeline: sentence filtering, model assembly, article labeling."""

from __future__ import annotations

import numpy as np
import pytest

from wpforensic.corpus import Sentence
from wpforensic.topics.clustering import OUTLIER, ClusterAssignment
from wpforensic.topics.embeddings import EmbeddingMatrix
from wpforensic.topics.pipeline import (
    MIN_SENTENCE_TOKENS,
    build_topic_model,
    filter_sentences,
    label_articles,
    name_topic,
)


def sent(post_id: int, ordinal: int, text: str, tokens: int) -> Sentence:
    return Sentence("site", post_id, ordinal, text, tokens)


class TestFilterSentences:
    def test_four_token_sentence_dropped(self) -> None:
        assert filter_sentences([sent(1, 0, "only four tokens here", 4)]) == []

    def test_five_token_sentence_kept(self) -> None:
        kept = filter_sentences([sent(1, 0, "exactly five tokens right here", 5)])
        assert len(kept) == 1

    def test_threshold_constant(self) -> None:
        assert MIN_SENTENCE_TOKENS == 5

    def test_empty_input(self) -> None:
        assert filter_sentences([]) == []

    def test_mixed_preserves_order(self) -> None:
        sentences = [
            sent(1, 0, "a b c d e f", 6),
            sent(1, 1, "a b", 2),
            sent(2, 0, "a b c d e", 5),
        ]
        kept = filter_sentences(sentences)
        assert [s.key for s in kept] == ["site:1:0", "site:2:0"]


class TestNameTopic:
    def test_top_three_joined(self) -> None:
        assert name_topic(["a", "b", "c", "d"]) == "a, b, c"

    def test_fewer_than_three(self) -> None:
        assert name_topic(["solo"]) == "solo"
        assert name_topic([]) == ""


class TestLabelArticles:
    def test_outliers_excluded_from_label_set(self) -> None:
        # Article 1's sentences land in clusters {3, 3, OUTLIER, 7}; a
        # second article fills the remaining labels so the assignment's
        # dense-label invariant holds.
        sentences = [sent(1, i, "w " * 5, 5) for i in range(4)]
        fillers = [sent(2, i, "w " * 5, 5) for i in range(6)]
        labels = {
            "site:1:0": 3,
            "site:1:1": 3,
            "site:1:2": OUTLIER,
            "site:1:3": 7,
        }
        for filler, label in zip(fillers, (0, 1, 2, 4, 5, 6)):
            labels[filler.key] = label
        assignment = ClusterAssignment(labels=labels, n_clusters=8)
        got = label_articles(assignment, sentences + fillers)
        assert got[("site", 1)] == {3, 7}
        assert got[("site", 2)] == {0, 1, 2, 4, 5, 6}

    def test_all_outlier_article_maps_to_empty_set(self) -> None:
        sentences = [sent(9, 0, "w " * 5, 5), sent(9, 1, "w " * 5, 5)]
        assignment = ClusterAssignment(
            labels={"site:9:0": OUTLIER, "site:9:1": OUTLIER}, n_clusters=0
        )
        assert label_articles(assignment, sentences) == {("site", 9): set()}

    def test_multiple_articles(self) -> None:
        sentences = [sent(1, 0, "w " * 5, 5), sent(2, 0, "w " * 5, 5)]
        assignment = ClusterAssignment(
            labels={"site:1:0": 0, "site:2:0": 1}, n_clusters=2
        )
        got = label_articles(assignment, sentences)
        assert got == {("site", 1): {0}, ("site", 2): {1}}


def two_theme_inputs(
    per_blob: int = 30, dim: int = 16, seed: int = 5
) -> tuple[list[Sentence], EmbeddingMatrix]:
    """Sentences in two well-separated embedding blobs with themed texts."""
    rng = np.random.default_rng(seed)
    texts = {
        0: "russian military convoy shelled mariupol streets today",
        1: "grain export corridor reopened odesa port quickly",
    }
    sentences: list[Sentence] = []
    rows: list[np.ndarray] = []
    for theme in (0, 1):
        center = np.zeros(dim)
        center[theme] = 60.0
        for i in range(per_blob):
            sentences.append(sent(theme * 100 + i, 0, texts[theme], 7))
            rows.append(center + rng.normal(scale=1.0, size=dim))
    matrix = EmbeddingMatrix(
        ids=[s.key for s in sentences],
        rows=np.asarray(rows, dtype=np.float32),
        l2_normalized=False,
    )
    return sentences, matrix


class TestBuildTopicModel:
    def test_recovers_two_themes(self) -> None:
        sentences, matrix = two_theme_inputs()
        assignment, model = build_topic_model(
            sentences,
            matrix,
            min_cluster_size=10,
            reduced_dim=3,
            diversity=0.5,
            top_n_keywords=5,
        )
        assert assignment.n_clusters == 2
        assert set(model.topics) == {0, 1}
        for info in model.topics.values():
            assert info.size == 30
            assert 0 < len(info.keywords) <= 5
            weights = [w for _, w in info.keywords]
            assert all(w >= 0.0 for w in weights)
            assert info.name == ", ".join(t for t, _ in info.keywords[:3])
        # The two themes never share a cluster.
        labels_by_theme = {
            theme: {
                assignment.labels[s.key]
                for s in sentences
                if s.post_id // 100 == theme and assignment.labels[s.key] != OUTLIER
            }
            for theme in (0, 1)
        }
        assert labels_by_theme[0].isdisjoint(labels_by_theme[1])

    def test_keywords_match_theme_vocabulary(self) -> None:
        sentences, matrix = two_theme_inputs()
        _, model = build_topic_model(
            sentences, matrix, min_cluster_size=10, reduced_dim=3
        )
        theme_terms = {
            0: "russian military convoy shelled mariupol streets today".split(),
            1: "grain export corridor reopened odesa port quickly".split(),
        }
        for info in model.topics.values():
            words = {w for term, _ in info.keywords for w in term.split()}
            assert words <= set(theme_terms[0]) or words <= set(theme_terms[1])

    def test_without_term_vectors_keeps_score_order(self) -> None:
        # With no term vectors every candidate ties at similarity zero, so
        # MMR degenerates to candidate (weight) order and the name is the
        # lexicographic head of the tied top terms.
        sentences, matrix = two_theme_inputs()
        _, model = build_topic_model(
            sentences, matrix, min_cluster_size=10, reduced_dim=3
        )
        names = {info.name for info in model.topics.values()}
        assert names == {
            "convoy, convoy shelled, mariupol",
            "corridor, corridor reopened, export",
        }

    def test_deterministic_across_runs(self) -> None:
        sentences, matrix = two_theme_inputs()
        first = build_topic_model(sentences, matrix, min_cluster_size=10, reduced_dim=3)
        second = build_topic_model(sentences, matrix, min_cluster_size=10, reduced_dim=3)
        assert first[0].labels == second[0].labels
        assert {k: v.name for k, v in first[1].topics.items()} == {
            k: v.name for k, v in second[1].topics.items()
        }
        assert first[1].params == second[1].params

    def test_params_recorded(self) -> None:
        sentences, matrix = two_theme_inputs()
        assignment, model = build_topic_model(
            sentences, matrix, min_cluster_size=10, reduced_dim=3, diversity=0.3
        )
        assert model.params["min_cluster_size"] == 10
        assert model.params["min_samples"] == 10
        assert model.params["reduced_dim"] == 3
        assert model.params["diversity"] == 0.3
        assert model.params["sentence_count"] == 60
        assert model.params["outlier_count"] == len(assignment.outliers())

    def test_mismatched_ids_rejected(self) -> None:
        sentences, matrix = two_theme_inputs()
        with pytest.raises(ValueError, match="do not match"):
            build_topic_model(sentences[:-1], matrix, min_cluster_size=10, reduced_dim=3)

    def test_duplicate_sentence_keys_rejected(self) -> None:
        sentences, matrix = two_theme_inputs()
        doubled = sentences + [sentences[0]]
        with pytest.raises(ValueError, match="duplicate"):
            build_topic_model(doubled, matrix, min_cluster_size=10, reduced_dim=3)

    def test_term_vectors_steer_selection(self) -> None:
        # Give one candidate term a vector aligned with the topic mean and
        # every other term an opposing vector: the aligned term is picked
        # first within its cluster.
        sentences, matrix = two_theme_inputs()
        mean0 = matrix.rows[:30].astype(np.float64).mean(axis=0)
        term_ids = ["mariupol", "convoy"]
        term_rows = np.asarray([mean0, -mean0], dtype=np.float32)
        term_matrix = EmbeddingMatrix(ids=term_ids, rows=term_rows, l2_normalized=False)
        _, model = build_topic_model(
            sentences, matrix, term_matrix, min_cluster_size=10, reduced_dim=3
        )
        theme0 = next(
            info for info in model.topics.values() if "mariupol" in {t for t, _ in info.keywords}
        )
        assert theme0.keywords[0][0] == "mariupol"
