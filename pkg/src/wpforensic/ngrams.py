"""Monthly top-k n-gram tables.

Counts contiguous 2-4-grams over analysis-mode tokens, then selects the top
k per month after dropping excluded phrases and n-grams subsumed by an
equally frequent longer n-gram, keeping ties for k-th place.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from .corpus import Corpus, tokenize

Ngram = tuple[str, ...]

DEFAULT_EXCLUSIONS: frozenset[Ngram] = frozenset({("armed", "forces")})
DEFAULT_K = 10
N_RANGE = (2, 4)


@dataclass
class NgramTable:
    site_id: str
    language: str
    month: tuple[int, int]  # (year, month) in Moscow time
    rows: list[tuple[Ngram, int, int]]  # (ngram, count, rank)


def count_ngrams(docs: list[list[str]], n_range: tuple[int, int] = N_RANGE) -> Counter:
    """Count all contiguous n-grams, n in [n_range[0], n_range[1]], over docs.

    Tokens must already be analysis-mode (lowercased, stopword/punct-free).
    """
    lo, hi = n_range
    counts: Counter = Counter()
    for doc in docs:
        for n in range(lo, hi + 1):
            for i in range(len(doc) - n + 1):
                counts[tuple(doc[i : i + n])] += 1
    return counts


def _contiguous_subgrams(ngram: Ngram) -> set[Ngram]:
    """All strictly shorter contiguous sub-n-grams of ``ngram``."""
    subs = set()
    length = len(ngram)
    for sub_len in range(1, length):
        for start in range(length - sub_len + 1):
            subs.add(ngram[start : start + sub_len])
    return subs


def select_top(
    counts: Counter,
    k: int = DEFAULT_K,
    exclusions: frozenset[Ngram] = DEFAULT_EXCLUSIONS,
) -> list[tuple[Ngram, int, int]]:
    """Apply the selection rules and return (ngram, count, rank) rows.

    1. drop excluded n-grams;
    2. drop any n-gram that is a contiguous part of a longer n-gram with
       equal count (e.g. a bigram inside an equally frequent trigram);
    3. rank by count descending, ties broken lexicographically;
    4. keep rank <= k plus everything tied with the count at rank k.
    """
    kept = {g: c for g, c in counts.items() if g not in exclusions}

    subsumed = set()
    for ngram, count in kept.items():
        for sub in _contiguous_subgrams(ngram):
            if kept.get(sub) == count:
                subsumed.add(sub)
    survivors = [(g, c) for g, c in kept.items() if g not in subsumed]

    survivors.sort(key=lambda item: (-item[1], item[0]))
    if len(survivors) > k:
        cutoff = survivors[k - 1][1]
        survivors = [item for i, item in enumerate(survivors) if i < k or item[1] == cutoff]
    return [(g, c, rank) for rank, (g, c) in enumerate(survivors, start=1)]


def monthly_tables(
    corpus: Corpus,
    site_id: str,
    language: str,
    k: int = DEFAULT_K,
    exclusions: frozenset[Ngram] = DEFAULT_EXCLUSIONS,
) -> list[NgramTable]:
    """One table per Moscow-time calendar month that has at least one article."""
    months: dict[tuple[int, int], list[list[str]]] = {}
    for article in corpus:
        if article.site_id != site_id or article.language != language:
            continue
        if article.date_msk is None:
            continue
        bucket = (article.date_msk.year, article.date_msk.month)
        months.setdefault(bucket, []).append(tokenize(article.text, "analysis"))
    tables = []
    for month in sorted(months):
        counts = count_ngrams(months[month])
        tables.append(
            NgramTable(
                site_id=site_id,
                language=language,
                month=month,
                rows=select_top(counts, k=k, exclusions=exclusions),
            )
        )
    return tables


def load_exclusions(path) -> frozenset[Ngram]:
    """Exclusion list file: one space-separated n-gram per line, # comments."""
    out = set()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line and not line.startswith("#"):
                out.add(tuple(line.lower().split()))
    return frozenset(out)
