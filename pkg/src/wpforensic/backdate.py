"""Backdating detection via auto-increment ID / publication-date inversions.

WordPress assigns post IDs in creation order regardless of the displayed
date, so a post dated earlier than a *later-dated* post with a *lower* ID
must have been given a date before its true creation time.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime, timezone

import numpy as np

from .corpus import Corpus

GRACE_DAYS_DEFAULT = 2
_SECONDS_PER_DAY = 86400


@dataclass
class BackdateFlag:
    """Verdict for one flagged post.

    ``witnesses`` are all lower-ID posts dated strictly later than the flagged
    post's claimed date; each one independently proves the inversion.
    """

    site_id: str
    post_id: int
    claimed_date: datetime
    witnesses: list[int]
    estimated_true_date: datetime | None = None
    magnitude_days: int | None = None


def _epoch(ts: datetime) -> float:
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.timestamp()


def detect_backdated(
    posts: list[tuple[int, datetime]], site_id: str = ""
) -> list[BackdateFlag]:
    """Flag every post A for which some post B has id(B) < id(A) and
    date(B) > date(A); both inequalities strict, so equal dates never
    create flags.

    Scan implementation: sort by (date asc, id asc), sweep the equal-date
    blocks from latest to earliest maintaining the minimum ID seen among
    strictly later dates. Witness lists are filled in afterwards.
    """
    ids = [p[0] for p in posts]
    if len(set(ids)) != len(ids):
        raise ValueError(f"duplicate post ids in input for site {site_id!r}")
    if not posts:
        return []

    order = sorted(posts, key=lambda p: (p[1], p[0]))
    n = len(order)

    flagged: list[tuple[int, datetime]] = []
    min_id_later: int | None = None
    i = n - 1
    while i >= 0:
        j = i
        while j >= 0 and order[j][1] == order[i][1]:
            j -= 1
        # order[j+1 .. i] share one date; only strictly later blocks witness.
        for k in range(j + 1, i + 1):
            pid, date = order[k]
            if min_id_later is not None and min_id_later < pid:
                flagged.append((pid, date))
        block_min = min(order[k][0] for k in range(j + 1, i + 1))
        min_id_later = block_min if min_id_later is None else min(min_id_later, block_min)
        i = j

    # Witness assembly, vectorized over id-sorted arrays so large inputs stay
    # inside the analysis runtime budget.
    by_id = sorted(posts)
    id_arr = np.array([p[0] for p in by_id], dtype=np.int64)
    date_arr = np.array([_epoch(p[1]) for p in by_id], dtype=np.float64)

    flags = []
    for pid, date in sorted(flagged):
        k = int(np.searchsorted(id_arr, pid))
        mask = date_arr[:k] > _epoch(date)
        flags.append(
            BackdateFlag(
                site_id=site_id,
                post_id=pid,
                claimed_date=date,
                witnesses=[int(w) for w in id_arr[:k][mask]],
            )
        )
    return flags


def estimate_true_date(
    flag: BackdateFlag, posts: list[tuple[int, datetime]], flagged_ids: set[int]
) -> tuple[datetime | None, int | None]:
    """Estimate when a flagged post was really created.

    The estimate is the latest date among *unflagged* lower-ID posts (a lower
    bound on creation time); the magnitude is whole days between claim and
    estimate, floored at 0. Returns (None, None) when every predecessor is
    itself flagged.
    """
    candidates = [
        date for pid, date in posts if pid < flag.post_id and pid not in flagged_ids
    ]
    if not candidates:
        return None, None
    estimate = max(candidates)
    delta = (estimate - flag.claimed_date).total_seconds()
    magnitude = max(0, int(delta // _SECONDS_PER_DAY))
    return estimate, magnitude


def detect_with_estimates(
    posts: list[tuple[int, datetime]], site_id: str = ""
) -> list[BackdateFlag]:
    """Run detection and fill in true-date estimates for one site."""
    flags = detect_backdated(posts, site_id)
    if not flags:
        return flags
    flagged_ids = {f.post_id for f in flags}

    # Prefix maximum of unflagged dates in id order, built in one pass.
    by_id = sorted(posts)
    best: datetime | None = None
    prefix_best: dict[int, datetime | None] = {}
    for pid, date in by_id:
        prefix_best[pid] = best
        if pid not in flagged_ids and (best is None or date > best):
            best = date

    for flag in flags:
        estimate = prefix_best[flag.post_id]
        if estimate is None:
            flag.estimated_true_date, flag.magnitude_days = None, None
        else:
            delta = (estimate - flag.claimed_date).total_seconds()
            flag.estimated_true_date = estimate
            flag.magnitude_days = max(0, int(delta // _SECONDS_PER_DAY))
    return flags


def detect_corpus(corpus: Corpus) -> list[BackdateFlag]:
    """Detect backdating per site (IDs are not comparable across sites)."""
    flags: list[BackdateFlag] = []
    for site in corpus.sites:
        posts = [
            (a.post_id, a.date_gmt)
            for a in corpus
            if a.site_id == site and a.date_gmt is not None
        ]
        flags.extend(detect_with_estimates(posts, site))
    return flags


def backdate_stats(
    corpus: Corpus, flags: list[BackdateFlag]
) -> list[tuple[str, float, float | None, int | None]]:
    """Per-language backdating table across all sites.

    Rows are (language, percent flagged, mean magnitude, max magnitude)
    sorted by percent descending. Magnitudes are computed over flagged posts
    only (labelled as such in the CLI output) and are None when no flagged
    post of that language has a measurable magnitude.
    """
    magnitudes: dict[str, list[int]] = {}
    totals: dict[str, int] = {}
    counts: dict[str, int] = {}
    for article in corpus:
        totals[article.language] = totals.get(article.language, 0) + 1
    for flag in flags:
        article = corpus.get((flag.site_id, flag.post_id))
        if article is None:
            continue
        counts[article.language] = counts.get(article.language, 0) + 1
        if flag.magnitude_days is not None:
            magnitudes.setdefault(article.language, []).append(flag.magnitude_days)
    rows = []
    for language, total in totals.items():
        flagged = counts.get(language, 0)
        percent = 100.0 * flagged / total
        mags = magnitudes.get(language)
        mean_mag = sum(mags) / len(mags) if mags else None
        max_mag = max(mags) if mags else None
        rows.append((language, percent, mean_mag, max_mag))
    rows.sort(key=lambda r: (-r[1], r[0]))
    return rows


def classify_grace(
    flags: list[BackdateFlag], grace_days: int = GRACE_DAYS_DEFAULT
) -> dict[str, list[BackdateFlag]]:
    """Split flags into probable forward-dating vs true backdating.

    A magnitude of at most ``grace_days`` (inclusive) is consistent with a
    post scheduled a day or two into the future rather than deliberate
    backdating. Flags without a magnitude estimate count as true backdating.
    """
    partition: dict[str, list[BackdateFlag]] = {
        "probable_forward_dating": [],
        "true_backdating": [],
    }
    for flag in flags:
        if flag.magnitude_days is not None and flag.magnitude_days <= grace_days:
            partition["probable_forward_dating"].append(flag)
        else:
            partition["true_backdating"].append(flag)
    return partition
