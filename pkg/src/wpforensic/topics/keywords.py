"""Cluster keyword scoring: class-based TF-IDF and MMR diversification."""

from __future__ import annotations

import logging
from collections import Counter
from collections.abc import Iterable, Sequence

import numpy as np

logger = logging.getLogger(__name__)


def terms_of(tokens: Sequence[str]) -> Counter:
    """Count unigrams and space-joined bigrams of a token sequence."""
    counts = Counter(tokens)
    counts.update(" ".join(pair) for pair in zip(tokens, tokens[1:]))
    return counts


def ctfidf(
    cluster_tokens: dict[int, Sequence[str]],
    vocab: Iterable[str] | None = None,
) -> dict[int, list[tuple[str, float]]]:
    """Class-based TF-IDF over per-cluster concatenated token lists.

    Terms are unigrams and bigrams (bigrams joined with a single space)
    drawn from ``vocab`` when given, otherwise from the token lists
    themselves. For term ``t`` in class ``c``::

        tf(t, c)  = count(t, c) / total term count of c      (L1 norm)
        idf(t)    = log(1 + A / f_t)

    where ``A`` is the mean total term count per class and ``f_t`` the
    total count of ``t`` across classes. Returns, per class, scored terms
    sorted by weight descending (ties: term ascending). With an explicit
    ``vocab`` every vocab term is listed, at weight 0.0 when absent from
    the class; otherwise only terms occurring in the class appear. An
    empty class yields an empty list and a warning.
    """
    if not cluster_tokens:
        return {}
    raw_counts = {c: terms_of(list(toks)) for c, toks in cluster_tokens.items()}
    allowed = None
    if vocab is not None:
        allowed = set(vocab)
        raw_counts = {
            c: Counter({t: k for t, k in cnt.items() if t in allowed})
            for c, cnt in raw_counts.items()
        }
    totals = {c: sum(cnt.values()) for c, cnt in raw_counts.items()}
    mean_total = sum(totals.values()) / len(totals)
    freq: Counter = Counter()
    for cnt in raw_counts.values():
        freq.update(cnt)

    out: dict[int, list[tuple[str, float]]] = {}
    for c, cnt in raw_counts.items():
        if totals[c] == 0:
            logger.warning("class %s has no terms; empty keyword list", c)
            out[c] = []
            continue
        terms = allowed if allowed is not None else cnt.keys()
        scored = [
            (
                t,
                (cnt[t] / totals[c]) * np.log1p(mean_total / freq[t]) if cnt[t] else 0.0,
            )
            for t in terms
        ]
        scored.sort(key=lambda tw: (-tw[1], tw[0]))
        out[c] = scored
    return out


def _cosine(a: np.ndarray, b: np.ndarray) -> float:
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(np.dot(a, b) / (na * nb))


def mmr_diversify(
    candidates: Sequence[str],
    term_vectors: dict[str, np.ndarray],
    topic_vector: np.ndarray,
    diversity: float = 0.5,
    top_n: int = 10,
) -> list[str]:
    """Pick up to ``top_n`` terms by maximal marginal relevance.

    The first pick maximizes cosine similarity to the topic vector;
    each later pick maximizes
    ``(1 - diversity) * cos(term, topic) - diversity * max cos(term, already picked)``.
    Ties resolve to the earlier candidate. ``diversity=0`` degenerates
    to a pure similarity ranking. Terms without a vector (or with a
    zero vector) get similarity 0 and a warning.
    """
    if not candidates:
        raise ValueError("candidates must be non-empty")
    if not 0.0 <= diversity <= 1.0:
        raise ValueError("diversity must be within [0, 1]")
    topic_vector = np.asarray(topic_vector, dtype=np.float64)

    vectors: list[np.ndarray] = []
    for term in candidates:
        vec = term_vectors.get(term)
        if vec is None or not np.linalg.norm(vec):
            logger.warning("no usable vector for term %r; treating similarity as 0", term)
            vec = np.zeros_like(topic_vector)
        vectors.append(np.asarray(vec, dtype=np.float64))
    relevance = [_cosine(v, topic_vector) for v in vectors]

    remaining = list(range(len(candidates)))
    first = max(remaining, key=lambda i: (relevance[i], -i))
    picked = [first]
    remaining.remove(first)
    while remaining and len(picked) < top_n:
        def score(i: int) -> float:
            redundancy = max(_cosine(vectors[i], vectors[j]) for j in picked)
            return (1.0 - diversity) * relevance[i] - diversity * redundancy

        best = max(remaining, key=lambda i: (score(i), -i))
        picked.append(best)
        remaining.remove(best)
    return [candidates[i] for i in picked]
