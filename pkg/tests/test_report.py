"""Tests for temporal/coverage report tables.

All bucketing is asserted against Moscow time (UTC+3): several cases
plant timestamps late in the UTC day so the Moscow calendar date falls
on the next day, week, or month.
"""

from __future__ import annotations

import dataclasses
import logging
import math
from datetime import date

import pytest

from factories import make_article, make_corpus
from wpforensic.extract import TranslationGroup
from wpforensic.report import (
    HolidayRange,
    corpus_summary,
    holiday_weeks,
    language_coverage,
    load_holidays,
    month_key,
    monthly_counts,
    monthly_group_counts,
    topics_per_article_histogram,
    weekend_share,
    weekly_counts,
    weekly_topic_counts,
)


def group(group_id: str, members: dict[str, tuple[str, int]]) -> TranslationGroup:
    return TranslationGroup(group_id=group_id, members=members, orphaned=False)


class TestMonthlyCounts:
    def test_counts_by_site_language_and_month(self) -> None:
        corpus = make_corpus(
            make_article("rrn", 1, date="2022-02-15 10:00"),
            make_article("rrn", 2, date="2022-03-01 10:00"),
            make_article("rrn", 3, date="2022-03-12 09:00"),
            make_article("rrn", 4, language="fr", date="2022-03-10 10:00"),
            make_article("wof", 5, date="2022-04-30 10:00"),
        )
        assert monthly_counts(corpus) == [
            ("rrn", "en", "2022-02", 1),
            ("rrn", "en", "2022-03", 2),
            ("rrn", "fr", "2022-03", 1),
            ("wof", "en", "2022-04", 1),
        ]

    def test_same_month_articles_fold_into_one_row(self) -> None:
        corpus = make_corpus(
            make_article("rrn", 1, date="2022-03-01 10:00"),
            make_article("rrn", 2, date="2022-03-15 10:00"),
            make_article("rrn", 3, date="2022-03-31 10:00"),
        )
        assert monthly_counts(corpus) == [("rrn", "en", "2022-03", 3)]

    def test_late_utc_timestamp_lands_in_next_moscow_month(self) -> None:
        # 2022-02-28 22:00 UTC is already 2022-03-01 01:00 in Moscow.
        corpus = make_corpus(make_article("rrn", 1, date="2022-02-28 22:00"))
        assert monthly_counts(corpus) == [("rrn", "en", "2022-03", 1)]

    def test_counts_sum_to_corpus_size(self) -> None:
        corpus = make_corpus(
            *(
                make_article("rrn", i, date=f"2022-03-{d:02d} 10:00")
                for i, d in enumerate([1, 1, 5, 9, 28], start=1)
            ),
            make_article("wof", 9, language="de", date="2022-04-02 10:00"),
        )
        rows = monthly_counts(corpus)
        assert sum(n for *_, n in rows) == len(corpus)
        assert rows == sorted(rows)

    def test_empty_corpus(self) -> None:
        assert monthly_counts(make_corpus()) == []

    def test_exclude_partial_drops_incomplete_first_month(self) -> None:
        # Corpus runs Feb 15 .. Apr 30: February is partial, April ends on
        # its last calendar day and is kept.
        corpus = make_corpus(
            make_article("rrn", 1, date="2022-02-15 10:00"),
            make_article("rrn", 2, date="2022-03-01 10:00"),
            make_article("wof", 3, date="2022-04-30 10:00"),
        )
        assert monthly_counts(corpus, exclude_partial=True) == [
            ("rrn", "en", "2022-03", 1),
            ("wof", "en", "2022-04", 1),
        ]

    def test_exclude_partial_drops_incomplete_last_month(self) -> None:
        corpus = make_corpus(
            make_article("rrn", 1, date="2022-03-01 10:00"),
            make_article("rrn", 2, date="2022-04-02 10:00"),
        )
        assert monthly_counts(corpus, exclude_partial=True) == [
            ("rrn", "en", "2022-03", 1)
        ]

    def test_exclude_partial_noop_on_full_months(self) -> None:
        corpus = make_corpus(
            make_article("rrn", 1, date="2022-03-01 02:00"),
            make_article("rrn", 2, date="2022-03-31 10:00"),
        )
        full = monthly_counts(corpus)
        assert monthly_counts(corpus, exclude_partial=True) == full

    def test_missing_publication_date_raises(self) -> None:
        bad = dataclasses.replace(make_article("rrn", 7), date_gmt=None)
        corpus = make_corpus(bad)
        with pytest.raises(ValueError, match="rrn:7 has no publication date"):
            monthly_counts(corpus)


class TestMonthlyGroupCounts:
    def test_group_bucketed_by_earliest_member(self) -> None:
        corpus = make_corpus(
            make_article("rrn", 1, date="2022-03-30 10:00"),
            make_article("rrn", 2, language="fr", date="2022-04-02 10:00"),
            make_article("wof", 3, date="2022-04-05 10:00"),
        )
        groups = [
            group("rrn:1", {"en": ("rrn", 1), "fr": ("rrn", 2)}),
            group("wof:3", {"en": ("wof", 3)}),
        ]
        assert monthly_group_counts(corpus, groups) == [
            ("2022-03", 1),
            ("2022-04", 1),
        ]

    def test_exclude_partial_uses_corpus_boundaries(self) -> None:
        # Corpus spans Mar 1 .. Apr 2: March is complete, April partial.
        corpus = make_corpus(
            make_article("rrn", 1, date="2022-03-01 10:00"),
            make_article("rrn", 2, language="fr", date="2022-03-20 10:00"),
            make_article("wof", 3, date="2022-04-02 10:00"),
        )
        groups = [
            group("rrn:1", {"en": ("rrn", 1), "fr": ("rrn", 2)}),
            group("wof:3", {"en": ("wof", 3)}),
        ]
        assert monthly_group_counts(corpus, groups, exclude_partial=True) == [
            ("2022-03", 1)
        ]

    def test_no_groups(self) -> None:
        corpus = make_corpus(make_article("rrn", 1))
        assert monthly_group_counts(corpus, []) == []


class TestWeekendShare:
    def test_exact_share_with_moscow_weekends(self) -> None:
        weekdays = [
            "2022-03-01", "2022-03-02", "2022-03-03", "2022-03-04",
            "2022-03-07", "2022-03-08", "2022-03-09", "2022-03-10",
            "2022-03-11", "2022-03-14", "2022-03-15", "2022-03-16",
            "2022-03-17", "2022-03-21", "2022-03-22", "2022-03-23",
        ]
        articles = [
            make_article("rrn", i, date=f"{d} 10:00")
            for i, d in enumerate(weekdays, start=1)
        ]
        # Weekend-modified weekday posts: count toward modification only.
        articles[0] = make_article(
            "rrn", 1, date="2022-03-01 10:00", modified="2022-03-19 10:00"
        )
        articles[1] = make_article(
            "rrn", 2, date="2022-03-02 10:00", modified="2022-04-02 12:00"
        )
        articles += [
            # Sunday 21:30 UTC is Monday 00:30 in Moscow: a weekday.
            make_article("rrn", 17, date="2022-03-20 21:30"),
            # Friday 22:00 UTC is Saturday 01:00 in Moscow; its later
            # modification on a Monday removes it from the modified share.
            make_article(
                "rrn", 18, date="2022-03-18 22:00", modified="2022-03-21 10:00"
            ),
            make_article("rrn", 19, date="2022-03-19 10:00"),
            make_article("rrn", 20, date="2022-04-02 10:00"),
        ]
        corpus = make_corpus(*articles)
        assert len(corpus) == 20
        assert weekend_share(corpus) == {"publication": 0.15, "modification": 0.2}

    def test_utc_friday_night_is_moscow_saturday(self) -> None:
        corpus = make_corpus(make_article("rrn", 1, date="2022-03-18 22:00"))
        assert weekend_share(corpus)["publication"] == 1.0

    def test_utc_sunday_night_is_moscow_monday(self) -> None:
        corpus = make_corpus(make_article("rrn", 1, date="2022-03-20 21:30"))
        assert weekend_share(corpus) == {"publication": 0.0, "modification": 0.0}

    def test_modification_falls_back_to_publication(self) -> None:
        corpus = make_corpus(make_article("rrn", 1, date="2022-03-19 10:00"))
        assert weekend_share(corpus) == {"publication": 1.0, "modification": 1.0}

    def test_empty_corpus_yields_zero_shares(self) -> None:
        assert weekend_share(make_corpus()) == {
            "publication": 0.0,
            "modification": 0.0,
        }


class TestLanguageCoverage:
    def test_mean_and_population_std(self) -> None:
        langs = ["en", "fr", "de", "es", "ar", "zh", "ru"]
        big = group("rrn:1", {lang: ("rrn", i) for i, lang in enumerate(langs)})
        small = group("rrn:9", {"fr": ("rrn", 9)})
        stats = language_coverage([big, small])
        assert stats["group_count"] == 2
        assert stats["mean_langs"] == 4.0
        assert stats["std_langs"] == 3.0  # population std of {1, 7}
        assert stats["pct_without_english"] == 50.0

    def test_all_groups_have_english(self) -> None:
        groups = [
            group("a:1", {"en": ("a", 1)}),
            group("a:2", {"en": ("a", 2), "de": ("a", 3)}),
        ]
        stats = language_coverage(groups)
        assert stats["pct_without_english"] == 0.0
        assert stats["mean_langs"] == 1.5

    def test_empty_input(self) -> None:
        assert language_coverage([]) == {
            "group_count": 0,
            "mean_langs": 0.0,
            "std_langs": 0.0,
            "pct_without_english": 0.0,
        }


class TestTopicsPerArticleHistogram:
    def test_counts_mean_and_std(self) -> None:
        labels = {
            ("rrn", 1): {1},
            ("rrn", 2): {1, 2},
            ("rrn", 3): set(),
        }
        hist, mean, std = topics_per_article_histogram(labels)
        assert hist == {0: 1, 1: 1, 2: 1}
        assert list(hist) == [0, 1, 2]  # ascending key order
        assert mean == 1.0
        assert std == pytest.approx(math.sqrt(2.0 / 3.0), rel=1e-12)

    def test_all_articles_unlabeled(self) -> None:
        hist, mean, std = topics_per_article_histogram(
            {("rrn", 1): set(), ("rrn", 2): set()}
        )
        assert hist == {0: 2}
        assert mean == 0.0
        assert std == 0.0

    def test_empty_input(self) -> None:
        assert topics_per_article_histogram({}) == ({}, 0.0, 0.0)


class TestWeeklyCounts:
    def test_counts_by_site_and_iso_week(self) -> None:
        corpus = make_corpus(
            make_article("rrn", 1, date="2022-03-01 10:00"),  # ISO week 9
            make_article("rrn", 2, date="2022-03-02 10:00"),  # ISO week 9
            make_article("rrn", 3, date="2022-03-07 10:00"),  # ISO week 10
            make_article("wof", 4, date="2022-03-01 10:00"),
        )
        assert weekly_counts(corpus) == [
            ("rrn", 2022, 9, 2),
            ("rrn", 2022, 10, 1),
            ("wof", 2022, 9, 1),
        ]

    def test_iso_year_differs_from_calendar_year(self) -> None:
        # Jan 1 2022 (Moscow) belongs to ISO week 52 of 2021.
        corpus = make_corpus(make_article("rrn", 1, date="2022-01-01 10:00"))
        assert weekly_counts(corpus) == [("rrn", 2021, 52, 1)]

    def test_late_utc_sunday_rolls_into_next_iso_week(self) -> None:
        # Sunday 22:00 UTC = Monday 01:00 Moscow, the following ISO week.
        corpus = make_corpus(make_article("rrn", 1, date="2022-03-06 22:00"))
        assert weekly_counts(corpus) == [("rrn", 2022, 10, 1)]

    def test_empty_corpus(self) -> None:
        assert weekly_counts(make_corpus()) == []


class TestWeeklyTopicCounts:
    def test_counts_per_label_and_week(self) -> None:
        corpus = make_corpus(
            make_article("rrn", 1, date="2022-03-01 10:00"),
            make_article("rrn", 2, date="2022-03-07 10:00"),
        )
        labels = {("rrn", 1): {0, 1}, ("rrn", 2): {0}}
        assert weekly_topic_counts(corpus, labels) == [
            (0, 2022, 9, 1),
            (0, 2022, 10, 1),
            (1, 2022, 9, 1),
        ]

    def test_unknown_article_is_skipped_with_warning(
        self, caplog: pytest.LogCaptureFixture
    ) -> None:
        corpus = make_corpus(make_article("rrn", 1, date="2022-03-01 10:00"))
        labels = {("rrn", 1): {4}, ("zzz", 9): {3}}
        with caplog.at_level(logging.WARNING, logger="wpforensic.report"):
            rows = weekly_topic_counts(corpus, labels)
        assert rows == [(4, 2022, 9, 1)]
        assert "label for unknown article zzz:9" in caplog.text

    def test_unlabeled_articles_contribute_nothing(self) -> None:
        corpus = make_corpus(make_article("rrn", 1, date="2022-03-01 10:00"))
        assert weekly_topic_counts(corpus, {("rrn", 1): set()}) == []


class TestHolidays:
    def test_range_ending_before_start_rejected(self) -> None:
        with pytest.raises(ValueError, match="'ny' ends before it starts"):
            HolidayRange(date(2022, 1, 9), date(2022, 1, 1), "ny")

    def test_single_day_range_allowed(self) -> None:
        rng = HolidayRange(date(2022, 2, 23), date(2022, 2, 23), "defender day")
        assert rng.start == rng.end

    def test_load_holidays_yaml(self, tmp_path) -> None:
        path = tmp_path / "holidays.yaml"
        path.write_text(
            "- start: 2022-01-01\n"
            "  end: 2022-01-09\n"
            "  name: New Year holidays\n"
            '- start: "2022-02-23"\n'
            "  name: Defender of the Fatherland Day\n",
            encoding="utf-8",
        )
        ranges = load_holidays(path)
        assert [(r.start, r.end, r.name) for r in ranges] == [
            (date(2022, 1, 1), date(2022, 1, 9), "New Year holidays"),
            (date(2022, 2, 23), date(2022, 2, 23), "Defender of the Fatherland Day"),
        ]

    def test_load_holidays_empty_file(self, tmp_path) -> None:
        path = tmp_path / "holidays.yaml"
        path.write_text("", encoding="utf-8")
        assert load_holidays(path) == []

    def test_load_holidays_rejects_non_list(self, tmp_path) -> None:
        path = tmp_path / "holidays.yaml"
        path.write_text("start: 2022-01-01\n", encoding="utf-8")
        with pytest.raises(ValueError, match="must be a list"):
            load_holidays(path)

    def test_holiday_weeks_spans_iso_year_boundary(self) -> None:
        ranges = [HolidayRange(date(2022, 1, 1), date(2022, 1, 9), "ny")]
        # Jan 1-2 2022 sit in ISO 2021-W52; Jan 3-9 are ISO 2022-W01.
        assert holiday_weeks(ranges) == {(2021, 52), (2022, 1)}

    def test_holiday_weeks_union_over_ranges(self) -> None:
        ranges = [
            HolidayRange(date(2022, 1, 1), date(2022, 1, 9), "ny"),
            HolidayRange(date(2022, 2, 23), date(2022, 2, 23), "defender day"),
        ]
        assert holiday_weeks(ranges) == {(2021, 52), (2022, 1), (2022, 8)}

    def test_no_holidays(self) -> None:
        assert holiday_weeks([]) == set()


class TestCorpusSummary:
    def test_means_per_site_and_language(self) -> None:
        corpus = make_corpus(
            make_article(
                "rrn", 1, paragraphs=["One two three.", "Four five six seven."]
            ),
            make_article("rrn", 2, paragraphs=["Alpha beta gamma delta epsilon."]),
            make_article(
                "rrn",
                3,
                language="fr",
                paragraphs=["Un deux. Trois quatre. Cinq six."],
            ),
            make_article("wof", 4, paragraphs=["Word word word word."]),
        )
        assert corpus_summary(corpus) == [
            ("rrn", "en", 2, 6.0, 1.5),
            ("rrn", "fr", 1, 6.0, 3.0),
            ("wof", "en", 1, 4.0, 1.0),
        ]

    def test_empty_corpus(self) -> None:
        assert corpus_summary(make_corpus()) == []


class TestMonthKey:
    def test_format(self) -> None:
        corpus = make_corpus(make_article("rrn", 1, date="2022-03-01 10:00"))
        article = next(iter(corpus))
        assert month_key(article.date_msk) == "2022-03"
