"""Independent reference implementations used as test oracles.

Each oracle restates a contract from first principles with a different
algorithmic shape than the library (full pairwise enumeration, brute
force, eigendecomposition), so agreement between the two is meaningful
evidence rather than a tautology. These were written and frozen before
the tests that consume them.
"""

from __future__ import annotations

from datetime import datetime, timezone

import numpy as np

SECONDS_PER_DAY = 86400


def epoch(ts: datetime) -> float:
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.timestamp()


# ---------------------------------------------------------------------------
# Backdating: raw pairwise definition
# ---------------------------------------------------------------------------


def backdated_ids_oracle(posts: list[tuple[int, datetime]]) -> set[int]:
    """Flag A iff there exists B with id(B) < id(A) and date(B) > date(A).

    Evaluated as the literal n x n comparison matrix, no sorting tricks.
    """
    if not posts:
        return set()
    ids = np.array([pid for pid, _ in posts], dtype=np.int64)
    times = np.array([epoch(d) for _, d in posts], dtype=np.float64)
    lower_id = ids[None, :] < ids[:, None]  # [a, b]: id(B) < id(A)
    later_date = times[None, :] > times[:, None]  # [a, b]: date(B) > date(A)
    flagged = (lower_id & later_date).any(axis=1)
    return {int(pid) for pid in ids[flagged]}


def witnesses_oracle(posts: list[tuple[int, datetime]], post_id: int) -> list[int]:
    """Every id proving post_id's inversion, by direct enumeration."""
    claimed = dict(posts)[post_id]
    return sorted(
        pid for pid, date in posts if pid < post_id and epoch(date) > epoch(claimed)
    )


def estimate_oracle(
    posts: list[tuple[int, datetime]], flagged: set[int], post_id: int
) -> tuple[datetime | None, int | None]:
    """(estimated true date, magnitude in whole days) per the stated rule."""
    claimed = dict(posts)[post_id]
    candidates = [
        date for pid, date in posts if pid < post_id and pid not in flagged
    ]
    if not candidates:
        return None, None
    estimate = max(candidates, key=epoch)
    magnitude = max(0, int((epoch(estimate) - epoch(claimed)) // SECONDS_PER_DAY))
    return estimate, magnitude


# ---------------------------------------------------------------------------
# n-gram selection: brute-force rules
# ---------------------------------------------------------------------------


def _is_contiguous_subgram(short: tuple, long: tuple) -> bool:
    if len(short) >= len(long):
        return False
    width = len(short)
    return any(long[i : i + width] == short for i in range(len(long) - width + 1))


def select_top_oracle(counts, k=10, exclusions=frozenset({("armed", "forces")})):
    """Brute-force restatement of the four selection rules.

    (1) drop exclusions; (2) drop g when some longer h with equal count
    contains g contiguously; (3) sort by count desc then lexicographic;
    (4) keep rank <= k plus ties with the count at rank k.
    """
    kept = [(g, c) for g, c in counts.items() if g not in exclusions]
    survivors = []
    for g, c in kept:
        subsumed = any(
            ch == c and _is_contiguous_subgram(g, h) for h, ch in kept if h != g
        )
        if not subsumed:
            survivors.append((g, c))
    survivors.sort(key=lambda item: (-item[1], item[0]))
    if len(survivors) > k:
        cutoff = survivors[k - 1][1]
        survivors = survivors[:k] + [it for it in survivors[k:] if it[1] == cutoff]
    return [(g, c, rank) for rank, (g, c) in enumerate(survivors, start=1)]


def count_ngrams_oracle(docs: list[list[str]], lo: int = 2, hi: int = 4) -> dict:
    """Plain dict-of-counts enumeration of contiguous n-grams."""
    counts: dict[tuple, int] = {}
    for doc in docs:
        for n in range(lo, hi + 1):
            for i in range(len(doc) - n + 1):
                gram = tuple(doc[i : i + n])
                counts[gram] = counts.get(gram, 0) + 1
    return counts


# ---------------------------------------------------------------------------
# PCA: eigendecomposition of the covariance matrix
# ---------------------------------------------------------------------------


def pca_projector_oracle(x: np.ndarray, target_dim: int) -> np.ndarray:
    """Orthogonal projector onto the top-target_dim covariance eigenspace."""
    x = np.asarray(x, dtype=np.float64)
    cov = np.cov(x, rowvar=False, bias=True)
    eigvals, eigvecs = np.linalg.eigh(cov)
    top = eigvecs[:, np.argsort(eigvals)[::-1][:target_dim]]
    return top @ top.T


# ---------------------------------------------------------------------------
# Point-biserial correlation: textbook mean-difference formula
# ---------------------------------------------------------------------------


def point_biserial_oracle(indicator, values) -> float:
    """r = (m1 - m0) / s_n * sqrt(p * q) with the population std."""
    ind = np.asarray(indicator, dtype=np.float64)
    val = np.asarray(values, dtype=np.float64)
    m1 = val[ind == 1].mean()
    m0 = val[ind == 0].mean()
    p = (ind == 1).mean()
    return float((m1 - m0) / val.std() * np.sqrt(p * (1 - p)))


# ---------------------------------------------------------------------------
# Request pacing: sliding-window rate over a timestamp log
# ---------------------------------------------------------------------------


def max_window_rate(timestamps, window: float = 10.0) -> float:
    """Max request rate over any half-open window [t, t + window)."""
    ts = sorted(timestamps)
    best = 0.0
    for i, t0 in enumerate(ts):
        count = sum(1 for t in ts[i:] if t < t0 + window)
        best = max(best, count / window)
    return best
