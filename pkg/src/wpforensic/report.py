"""Temporal and coverage statistics over a corpus.

All calendar bucketing uses Moscow time (fixed UTC+3), the operational
timezone of the studied sites. Every table here is a pure projection
of the corpus (plus, for topic tables, an article-label mapping), so
each CSV cell can be re-derived independently from ``corpus.jsonl``.
"""

from __future__ import annotations

import calendar
import logging
from dataclasses import dataclass
from datetime import date, datetime
from pathlib import Path

import numpy as np
import yaml

from .corpus import Corpus, split_sentences, tokenize
from .extract import TranslationGroup

logger = logging.getLogger(__name__)

SATURDAY = 5  # datetime.weekday() values


def month_key(ts: datetime) -> str:
    return f"{ts.year:04d}-{ts.month:02d}"


def _pub(article) -> datetime:
    ts = article.date_msk
    if ts is None:
        raise ValueError(
            f"article {article.site_id}:{article.post_id} has no publication date"
        )
    return ts


def _partial_months(corpus: Corpus) -> set[str]:
    """Boundary months not fully covered by the corpus date range."""
    dates = [_pub(a).date() for a in corpus]
    if not dates:
        return set()
    first, last = min(dates), max(dates)
    partial = set()
    if first.day != 1:
        partial.add(f"{first.year:04d}-{first.month:02d}")
    if last.day != calendar.monthrange(last.year, last.month)[1]:
        partial.add(f"{last.year:04d}-{last.month:02d}")
    return partial


def monthly_counts(
    corpus: Corpus, exclude_partial: bool = False
) -> list[tuple[str, str, str, int]]:
    """Article counts per (site, language, Moscow year-month).

    With ``exclude_partial`` the first/last calendar months are dropped
    when the corpus does not span them fully (first article after the
    1st, last article before the month's final day).
    """
    skip = _partial_months(corpus) if exclude_partial else set()
    counts: dict[tuple[str, str, str], int] = {}
    for article in corpus:
        key = (article.site_id, article.language, month_key(_pub(article)))
        counts[key] = counts.get(key, 0) + 1
    return sorted(
        (site, lang, month, n)
        for (site, lang, month), n in counts.items()
        if month not in skip
    )


def monthly_group_counts(
    corpus: Corpus,
    groups: list[TranslationGroup],
    exclude_partial: bool = False,
) -> list[tuple[str, int]]:
    """Translation-group counts per Moscow year-month.

    A group is bucketed by its earliest member's publication month
    (the month the story first appeared in any language).
    """
    skip = _partial_months(corpus) if exclude_partial else set()
    counts: dict[str, int] = {}
    for group in groups:
        earliest = min(_pub(corpus[key]) for key in group.members.values())
        month = month_key(earliest)
        counts[month] = counts.get(month, 0) + 1
    return sorted((m, n) for m, n in counts.items() if m not in skip)


def weekend_share(corpus: Corpus) -> dict[str, float]:
    """Fraction of articles published / modified on a Moscow weekend."""
    total = len(corpus)
    if total == 0:
        return {"publication": 0.0, "modification": 0.0}
    pub = sum(1 for a in corpus if _pub(a).weekday() >= SATURDAY)
    mod = sum(
        1 for a in corpus if (a.modified_msk or _pub(a)).weekday() >= SATURDAY
    )
    return {"publication": pub / total, "modification": mod / total}


def language_coverage(groups: list[TranslationGroup]) -> dict[str, float]:
    """Mean/std (population) of languages per group; share lacking English."""
    if not groups:
        return {
            "group_count": 0,
            "mean_langs": 0.0,
            "std_langs": 0.0,
            "pct_without_english": 0.0,
        }
    sizes = np.array([len(g.members) for g in groups], dtype=np.float64)
    without_en = sum(1 for g in groups if "en" not in g.members)
    return {
        "group_count": len(groups),
        "mean_langs": float(sizes.mean()),
        "std_langs": float(sizes.std()),  # population std (ddof=0)
        "pct_without_english": 100.0 * without_en / len(groups),
    }


def topics_per_article_histogram(
    article_labels: dict[tuple[str, int], set[int]],
) -> tuple[dict[int, int], float, float]:
    """Distribution of label-set sizes (including 0), with mean and std."""
    sizes = [len(v) for v in article_labels.values()]
    hist: dict[int, int] = {}
    for s in sizes:
        hist[s] = hist.get(s, 0) + 1
    if not sizes:
        return {}, 0.0, 0.0
    arr = np.array(sizes, dtype=np.float64)
    return dict(sorted(hist.items())), float(arr.mean()), float(arr.std())


def week_key(ts: datetime) -> tuple[int, int]:
    iso = ts.isocalendar()
    return (iso[0], iso[1])


def weekly_counts(corpus: Corpus) -> list[tuple[str, int, int, int]]:
    """Article counts per (site, ISO year, ISO week), Moscow calendar."""
    counts: dict[tuple[str, int, int], int] = {}
    for article in corpus:
        year, week = week_key(_pub(article))
        key = (article.site_id, year, week)
        counts[key] = counts.get(key, 0) + 1
    return sorted((site, y, w, n) for (site, y, w), n in counts.items())


def weekly_topic_counts(
    corpus: Corpus, article_labels: dict[tuple[str, int], set[int]]
) -> list[tuple[int, int, int, int]]:
    """Counts per (topic label, ISO year, ISO week) over labeled articles."""
    counts: dict[tuple[int, int, int], int] = {}
    for key, labels in article_labels.items():
        if key not in corpus:
            logger.warning("label for unknown article %s:%s ignored", *key)
            continue
        year, week = week_key(_pub(corpus[key]))
        for label in labels:
            k = (label, year, week)
            counts[k] = counts.get(k, 0) + 1
    return sorted((lab, y, w, n) for (lab, y, w), n in counts.items())


@dataclass
class HolidayRange:
    start: date
    end: date
    name: str

    def __post_init__(self) -> None:
        if self.end < self.start:
            raise ValueError(f"holiday {self.name!r} ends before it starts")


def load_holidays(path: str | Path) -> list[HolidayRange]:
    """Read holiday date ranges from YAML.

    Format: a list of ``{start: YYYY-MM-DD, end: YYYY-MM-DD, name: str}``
    mappings (``end`` defaults to ``start`` for one-day holidays).
    """
    data = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or []
    if not isinstance(data, list):
        raise ValueError("holiday config must be a list of date ranges")
    out = []
    for item in data:
        start = _as_date(item["start"])
        end = _as_date(item.get("end", item["start"]))
        out.append(HolidayRange(start, end, str(item.get("name", ""))))
    return out


def _as_date(value) -> date:
    if isinstance(value, datetime):
        return value.date()
    if isinstance(value, date):
        return value
    return date.fromisoformat(str(value))


def holiday_weeks(holidays: list[HolidayRange]) -> set[tuple[int, int]]:
    """ISO (year, week) pairs touched by any holiday range."""
    weeks: set[tuple[int, int]] = set()
    for rng in holidays:
        day = rng.start
        while day <= rng.end:
            iso = day.isocalendar()
            weeks.add((iso[0], iso[1]))
            day = date.fromordinal(day.toordinal() + 1)
    return weeks


def corpus_summary(corpus: Corpus) -> list[tuple[str, str, int, float, float]]:
    """Per (site, language): article count, mean tokens, mean sentences.

    Token counts use raw-mode tokenization; sentence counts come from
    the rule-based splitter, so values are methodologically parallel to
    (not identical with) counts from other tokenizers.
    """
    buckets: dict[tuple[str, str], list[tuple[int, int]]] = {}
    for article in corpus:
        tokens = len(tokenize(article.text, "raw"))
        sentences = len(split_sentences(article))
        buckets.setdefault((article.site_id, article.language), []).append(
            (tokens, sentences)
        )
    rows = []
    for (site, lang), pairs in sorted(buckets.items()):
        toks = np.array([p[0] for p in pairs], dtype=np.float64)
        sents = np.array([p[1] for p in pairs], dtype=np.float64)
        rows.append((site, lang, len(pairs), float(toks.mean()), float(sents.mean())))
    return rows
