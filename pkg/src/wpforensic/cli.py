"""Unified command-line frontend.

Verbs: ``harvest``, ``extract``, and ``analyze`` with one subcommand
per analysis. Exit codes: 0 success, 1 completed with warnings
(partial), 2 failure. Tabular outputs honor ``--format {csv,jsonl}``.
"""

from __future__ import annotations

import csv
import json
import logging
import sys
from pathlib import Path

import click

from . import __version__, backdate, charts, report
from .corpus import (
    Corpus,
    apply_cyrillic_annotations,
    detect_cyrillic,
    find_cross_site_duplicates,
    load_corpus,
    save_corpus,
    split_sentences,
    tokenize,
)
from .extract import (
    extract_snapshot,
    load_extract_config,
    resolve_translation_groups,
)
from .harvest import SiteConfig, snapshot
from .lexicon import load_lexicon, punctuation_rates, score_document
from .lexicon import group_means as lexicon_group_means
from .lexicon import site_correlation
from .ngrams import DEFAULT_EXCLUSIONS, DEFAULT_K, load_exclusions, monthly_tables
from .topics import build_topic_model, filter_sentences, label_articles
from .topics.embeddings import load_embeddings_stem

logger = logging.getLogger("wpforensic")


class _WarningCounter(logging.Handler):
    def __init__(self) -> None:
        super().__init__(level=logging.WARNING)
        self.count = 0

    def emit(self, record: logging.LogRecord) -> None:
        self.count += 1


def write_table(
    path: Path, fieldnames: list[str], rows: list[dict], fmt: str = "csv"
) -> None:
    """Write rows as CSV or JSON Lines with a stable column order."""
    path.parent.mkdir(parents=True, exist_ok=True)
    if fmt == "jsonl":
        with path.open("w", encoding="utf-8") as fh:
            for row in rows:
                fh.write(json.dumps({k: row.get(k) for k in fieldnames},
                                    ensure_ascii=False) + "\n")
        return
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fieldnames)
        writer.writeheader()
        writer.writerows(rows)


def _table_path(out: Path, stem: str, fmt: str) -> Path:
    return out / f"{stem}.{'jsonl' if fmt == 'jsonl' else 'csv'}"


format_option = click.option(
    "--format", "fmt", type=click.Choice(["csv", "jsonl"]), default="csv",
    show_default=True, help="Tabular output format.",
)


@click.group()
@click.version_option(__version__, prog_name="wpforensic")
def cli() -> None:
    """Forensic toolkit for WordPress-backed news sites."""


@cli.command()
@click.option("--site", "base_url", required=True, help="Site base URL.")
@click.option("--id", "site_id", required=True, help="Short site key.")
@click.option("--out", "out_dir", required=True, type=click.Path(path_type=Path))
@click.option("--rate", default=2.0, show_default=True, help="Max requests/second.")
@click.option("--page-size", default=100, show_default=True, help="Posts per page (max 100).")
@click.option("--timeout", default=30.0, show_default=True)
@click.option("--retries", default=3, show_default=True)
@click.option("--concurrency", default=4, show_default=True)
@click.option("--user-agent", default=None)
def harvest(base_url, site_id, out_dir, rate, page_size, timeout, retries,
            concurrency, user_agent) -> None:
    """Snapshot a site via its WordPress REST API."""
    kwargs = {}
    if user_agent:
        kwargs["user_agent"] = user_agent
    config = SiteConfig(
        site_id=site_id,
        base_url=base_url,
        page_size=page_size,
        rate_limit=rate,
        timeout=timeout,
        concurrency=concurrency,
        **kwargs,
    )
    config.retry.max_retries = retries
    manifest = snapshot(config, out_dir)
    click.echo(
        f"{site_id}: {manifest.post_count} posts, {manifest.page_count} pages, "
        f"{len(manifest.failures)} failure(s), {manifest.requests_made} requests"
    )


@cli.command("extract")
@click.option("--snapshot", "snapshot_dir", required=True,
              type=click.Path(exists=True, file_okay=False, path_type=Path))
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--out", "out_path", required=True, type=click.Path(path_type=Path))
def extract_cmd(snapshot_dir, config_path, out_path) -> None:
    """Extract a snapshot into corpus.jsonl."""
    configs = load_extract_config(config_path)
    corpus = extract_snapshot(snapshot_dir, configs)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    save_corpus(corpus, out_path)
    click.echo(f"{len(corpus)} articles from {len(corpus.sites)} site(s) -> {out_path}")


@cli.group()
@click.option("--seed", default=0, show_default=True,
              help="Reserved for synthetic-data generators; analyses are deterministic.")
def analyze(seed) -> None:
    """Run an analysis over an extracted corpus."""


corpus_option = click.option(
    "--corpus", "corpus_path", required=True,
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
)


@analyze.command("backdate")
@corpus_option
@click.option("--grace", default=2, show_default=True,
              help="Max days treated as probable forward-dating.")
@click.option("--out", "out_path", required=True, type=click.Path(path_type=Path))
@click.option("--stats", "stats_path", type=click.Path(path_type=Path), default=None,
              help="Optional per-language statistics table.")
@format_option
def backdate_cmd(corpus_path, grace, out_path, stats_path, fmt) -> None:
    """Detect backdated posts via auto-increment ID inversions."""
    corpus = load_corpus(corpus_path)
    flags = backdate.detect_corpus(corpus)
    partition = backdate.classify_grace(flags, grace_days=grace)
    class_of = {
        (f.site_id, f.post_id): name
        for name, members in partition.items()
        for f in members
    }
    iso = lambda dt: dt.isoformat() if dt else ""  # noqa: E731
    rows = [
        {
            "site": f.site_id,
            "post_id": f.post_id,
            "language": corpus[(f.site_id, f.post_id)].language,
            "claimed": iso(f.claimed_date),
            "estimated": iso(f.estimated_true_date),
            "magnitude_days": f.magnitude_days if f.magnitude_days is not None else "",
            "class": class_of[(f.site_id, f.post_id)],
        }
        for f in sorted(flags, key=lambda f: (f.site_id, f.post_id))
    ]
    write_table(out_path, ["site", "post_id", "language", "claimed", "estimated",
                           "magnitude_days", "class"], rows, fmt)
    if stats_path is not None:
        stats = backdate.backdate_stats(corpus, flags)
        write_table(
            stats_path,
            ["language", "percent_flagged", "mean_magnitude_days", "max_magnitude_days"],
            [
                {
                    "language": lang,
                    "percent_flagged": round(pct, 4),
                    "mean_magnitude_days": "" if mean is None else round(mean, 4),
                    "max_magnitude_days": "" if mx is None else mx,
                }
                for lang, pct, mean, mx in stats
            ],
            fmt,
        )
    click.echo(f"{len(rows)} flagged post(s) -> {out_path}")


@analyze.command("ngrams")
@corpus_option
@click.option("--site", default=None, help="Restrict to one site.")
@click.option("--lang", default="en", show_default=True)
@click.option("--k", default=DEFAULT_K, show_default=True)
@click.option("--exclude-file", type=click.Path(exists=True, path_type=Path), default=None)
@click.option("--out", "out_dir", required=True, type=click.Path(path_type=Path))
@format_option
def ngrams_cmd(corpus_path, site, lang, k, exclude_file, out_dir, fmt) -> None:
    """Monthly top-k n-gram tables (one file per site and month)."""
    corpus = load_corpus(corpus_path)
    exclusions = load_exclusions(exclude_file) if exclude_file else DEFAULT_EXCLUSIONS
    sites = [site] if site else corpus.sites
    written = 0
    for site_id in sites:
        for table in monthly_tables(corpus, site_id, lang, k=k, exclusions=exclusions):
            year, month = table.month
            stem = f"{table.site_id}_{table.language}_{year:04d}-{month:02d}"
            rows = [
                {"ngram": " ".join(ng), "count": count, "rank": rank}
                for ng, count, rank in table.rows
            ]
            write_table(_table_path(out_dir, stem, fmt),
                        ["ngram", "count", "rank"], rows, fmt)
            written += 1
    click.echo(f"{written} monthly table(s) -> {out_dir}")


@analyze.command("topics")
@corpus_option
@click.option("--emb", "emb_stem", required=True,
              help="Sentence embedding file stem (.json/.bin pair).")
@click.option("--term-emb", "term_stem", default=None,
              help="Term embedding file stem for MMR.")
@click.option("--lang", default="en", show_default=True,
              help="Language whose sentences were embedded.")
@click.option("--min-cluster-size", default=25, show_default=True)
@click.option("--min-samples", default=None, type=int)
@click.option("--dim", default=5, show_default=True)
@click.option("--diversity", default=0.5, show_default=True)
@click.option("--top-n", default=10, show_default=True)
@click.option("--out", "out_dir", required=True, type=click.Path(path_type=Path))
@format_option
def topics_cmd(corpus_path, emb_stem, term_stem, lang, min_cluster_size,
               min_samples, dim, diversity, top_n, out_dir, fmt) -> None:
    """Cluster sentence embeddings into topics and label articles."""
    corpus = load_corpus(corpus_path)
    sentences = []
    for article in corpus:
        if article.language == lang:
            sentences.extend(split_sentences(article))
    sentences = filter_sentences(sentences)
    matrix = load_embeddings_stem(emb_stem)
    term_matrix = load_embeddings_stem(term_stem) if term_stem else None
    assignment, model = build_topic_model(
        sentences,
        matrix,
        term_matrix,
        min_cluster_size=min_cluster_size,
        min_samples=min_samples,
        reduced_dim=dim,
        diversity=diversity,
        top_n_keywords=top_n,
    )
    out_dir.mkdir(parents=True, exist_ok=True)
    write_table(
        _table_path(out_dir, "assignments", fmt),
        ["sentence", "site", "post_id", "ordinal", "label"],
        [
            {
                "sentence": s.key,
                "site": s.site_id,
                "post_id": s.post_id,
                "ordinal": s.ordinal,
                "label": assignment.labels[s.key],
            }
            for s in sentences
        ],
        fmt,
    )
    topics_doc = {
        "params": model.params,
        "topics": {
            str(label): {
                "size": info.size,
                "name": info.name,
                "keywords": [{"term": t, "weight": w} for t, w in info.keywords],
            }
            for label, info in sorted(model.topics.items())
        },
    }
    (out_dir / "topics.json").write_text(
        json.dumps(topics_doc, ensure_ascii=False, indent=2) + "\n", encoding="utf-8"
    )
    labels = label_articles(assignment, sentences)
    write_table(
        _table_path(out_dir, "article_labels", fmt),
        ["site", "post_id", "labels"],
        [
            {
                "site": site,
                "post_id": post_id,
                "labels": " ".join(str(x) for x in sorted(labs)),
            }
            for (site, post_id), labs in sorted(labels.items())
        ],
        fmt,
    )
    click.echo(
        f"{assignment.n_clusters} topic(s), "
        f"{len(assignment.outliers())}/{len(sentences)} outlier sentences -> {out_dir}"
    )


@analyze.command("lexicon")
@corpus_option
@click.option("--lexicon", "lexicon_path", required=True,
              type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--lang", default="en", show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path(path_type=Path))
@format_option
def lexicon_cmd(corpus_path, lexicon_path, lang, out_path, fmt) -> None:
    """Score documents against a category lexicon (plus punctuation rates).

    Writes per-document scores to --out, group means to
    ``<out>_means`` and site correlations (when exactly two sites are
    present) to ``<out>_correlations``.
    """
    corpus = load_corpus(corpus_path)
    lex = load_lexicon(lexicon_path)
    cats = sorted(lex.categories)
    reports: dict[str, dict[str, float] | None] = {}
    site_of: dict[str, str] = {}
    rows = []
    punct_fields: list[str] = []
    for article in corpus:
        if article.language != lang:
            continue
        doc_id = f"{article.site_id}:{article.post_id}"
        tokens = [t.lower() for t in tokenize(article.text, "raw")]
        scores = score_document(tokens, lex)
        reports[doc_id] = scores
        site_of[doc_id] = article.site_id
        punct = punctuation_rates(article.text, len(tokens)) or {}
        if punct and not punct_fields:
            punct_fields = sorted(punct)
        row = {"site": article.site_id, "post_id": article.post_id,
               "words": len(tokens)}
        for cat in cats:
            row[cat] = round(scores[cat], 6) if scores else ""
        for name in sorted(punct):
            row[name] = round(punct[name], 6)
        rows.append(row)
    write_table(out_path, ["site", "post_id", "words", *cats, *punct_fields], rows, fmt)

    means = lexicon_group_means(reports, site_of)
    means_rows = [
        {"group": group, **{c: round(vals.get(c, 0.0), 6) for c in cats}}
        for group, vals in sorted(means.items())
    ]
    means_path = out_path.with_name(out_path.stem + "_means" + out_path.suffix)
    write_table(means_path, ["group", *cats], means_rows, fmt)

    sites = sorted(set(site_of.values()))
    if len(sites) == 2:
        corr = site_correlation(reports, site_of, positive_site=sites[0])
        corr_path = out_path.with_name(out_path.stem + "_correlations" + out_path.suffix)
        write_table(
            corr_path,
            ["category", f"r_{sites[0]}", f"r_{sites[1]}"],
            [
                {"category": c, f"r_{sites[0]}": round(r, 6),
                 f"r_{sites[1]}": round(-r, 6)}
                for c, r in sorted(corr.items())
            ],
            fmt,
        )
    else:
        logger.info("site correlation needs exactly 2 sites, found %d; skipped", len(sites))
    click.echo(f"{len(rows)} document(s) scored -> {out_path}")


@analyze.command("cyrillic")
@corpus_option
@click.option("--out", "out_path", required=True, type=click.Path(path_type=Path))
@click.option("--annotations", "annotations_path", default=None,
              type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help="Reviewer CSV (site_id,post_id,start,end,category) of final categories.")
@format_option
def cyrillic_cmd(corpus_path, out_path, annotations_path, fmt) -> None:
    """Find Cyrillic character runs inside non-Cyrillic articles."""
    corpus = load_corpus(corpus_path)
    findings = []
    for article in corpus:
        findings.extend(detect_cyrillic(article))
    if annotations_path is not None:
        findings = apply_cyrillic_annotations(findings, annotations_path)
    rows = [
        {
            "site_id": f.site_id,
            "post_id": f.post_id,
            "start": f.start,
            "end": f.end,
            "text": f.text,
            "context": f.context,
            "suggested_category": f.suggested_category,
            "final_category": f.final_category,
        }
        for f in findings
    ]
    write_table(out_path, ["site_id", "post_id", "start", "end", "text", "context",
                           "suggested_category", "final_category"], rows, fmt)
    click.echo(f"{len(rows)} finding(s) -> {out_path}")


@analyze.command("duplicates")
@corpus_option
@click.option("--out", "out_path", required=True, type=click.Path(path_type=Path))
@format_option
def duplicates_cmd(corpus_path, out_path, fmt) -> None:
    """Cross-site identical articles (normalized text equality)."""
    corpus = load_corpus(corpus_path)
    pairs = find_cross_site_duplicates(corpus)
    rows = [
        {"site_a": p.a[0], "post_a": p.a[1], "site_b": p.b[0], "post_b": p.b[1]}
        for p in pairs
    ]
    write_table(out_path, ["site_a", "post_a", "site_b", "post_b"], rows, fmt)
    click.echo(f"{len(rows)} duplicate pair(s) -> {out_path}")


def _read_article_labels(path: Path) -> dict[tuple[str, int], set[int]]:
    labels: dict[tuple[str, int], set[int]] = {}
    with path.open(encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            key = (row["site"], int(row["post_id"]))
            labs = row.get("labels", "").split()
            labels[key] = {int(x) for x in labs}
    return labels


@analyze.command("report")
@corpus_option
@click.option("--out", "out_dir", required=True, type=click.Path(path_type=Path))
@click.option("--exclude-partial-months", is_flag=True,
              help="Drop first/last months not fully covered by the data.")
@click.option("--holidays", "holidays_path", default=None,
              type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help="YAML list of holiday date ranges to flag in weekly tables.")
@click.option("--labels", "labels_path", default=None,
              type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help="article_labels table from `analyze topics`.")
@click.option("--charts/--no-charts", "with_charts", default=True, show_default=True)
@format_option
def report_cmd(corpus_path, out_dir, exclude_partial_months, holidays_path,
               labels_path, with_charts, fmt) -> None:
    """Temporal and coverage statistics (tables + charts)."""
    corpus = load_corpus(corpus_path)
    out_dir.mkdir(parents=True, exist_ok=True)

    summary = report.corpus_summary(corpus)
    write_table(
        _table_path(out_dir, "summary", fmt),
        ["site", "language", "articles", "mean_tokens", "mean_sentences"],
        [
            {"site": s, "language": l, "articles": n,
             "mean_tokens": round(mt, 2), "mean_sentences": round(ms, 2)}
            for s, l, n, mt, ms in summary
        ],
        fmt,
    )

    monthly = report.monthly_counts(corpus, exclude_partial=exclude_partial_months)
    write_table(
        _table_path(out_dir, "monthly_counts", fmt),
        ["site", "language", "month", "count"],
        [{"site": s, "language": l, "month": m, "count": n} for s, l, m, n in monthly],
        fmt,
    )

    groups, conflicts = resolve_translation_groups(corpus)
    for conflict in conflicts:
        logger.warning(
            "translation %s at %s:%s (%s): %s",
            conflict.kind, conflict.source[0], conflict.source[1],
            conflict.language, conflict.detail,
        )
    group_monthly = report.monthly_group_counts(
        corpus, groups, exclude_partial=exclude_partial_months
    )
    write_table(
        _table_path(out_dir, "monthly_group_counts", fmt),
        ["month", "count"],
        [{"month": m, "count": n} for m, n in group_monthly],
        fmt,
    )

    shares = report.weekend_share(corpus)
    write_table(
        _table_path(out_dir, "weekend_share", fmt),
        ["measure", "share"],
        [{"measure": k, "share": round(v, 6)} for k, v in sorted(shares.items())],
        fmt,
    )

    coverage = report.language_coverage(groups)
    write_table(
        _table_path(out_dir, "language_coverage", fmt),
        ["group_count", "mean_langs", "std_langs", "pct_without_english"],
        [{k: (round(v, 6) if isinstance(v, float) else v) for k, v in coverage.items()}],
        fmt,
    )

    holiday_weeks = set()
    if holidays_path is not None:
        holiday_weeks = report.holiday_weeks(report.load_holidays(holidays_path))
    weekly = report.weekly_counts(corpus)
    write_table(
        _table_path(out_dir, "weekly_counts", fmt),
        ["site", "iso_year", "iso_week", "count", "holiday_week"],
        [
            {"site": s, "iso_year": y, "iso_week": w, "count": n,
             "holiday_week": (y, w) in holiday_weeks}
            for s, y, w, n in weekly
        ],
        fmt,
    )

    if labels_path is not None:
        labels = _read_article_labels(labels_path)
        hist, mean, std = report.topics_per_article_histogram(labels)
        write_table(
            _table_path(out_dir, "topics_per_article", fmt),
            ["topics", "articles"],
            [{"topics": k, "articles": v} for k, v in hist.items()],
            fmt,
        )
        write_table(
            _table_path(out_dir, "topics_per_article_stats", fmt),
            ["mean", "std"],
            [{"mean": round(mean, 6), "std": round(std, 6)}],
            fmt,
        )
        weekly_topics = report.weekly_topic_counts(corpus, labels)
        write_table(
            _table_path(out_dir, "weekly_topic_counts", fmt),
            ["label", "iso_year", "iso_week", "count", "holiday_week"],
            [
                {"label": lab, "iso_year": y, "iso_week": w, "count": n,
                 "holiday_week": (y, w) in holiday_weeks}
                for lab, y, w, n in weekly_topics
            ],
            fmt,
        )
        if with_charts:
            charts.histogram_chart(hist, out_dir / "topics_per_article.svg")

    if with_charts:
        charts.stacked_monthly_chart(monthly, out_dir / "monthly_counts.svg")
    click.echo(f"report tables -> {out_dir}")


def main() -> None:
    logging.basicConfig(
        level=logging.INFO, format="%(levelname)s %(name)s: %(message)s"
    )
    counter = _WarningCounter()
    logging.getLogger().addHandler(counter)
    try:
        cli.main(standalone_mode=False)
    except click.exceptions.Exit as exc:
        sys.exit(exc.exit_code)
    except click.ClickException as exc:
        exc.show()
        sys.exit(2)
    except click.Abort:
        click.echo("aborted", err=True)
        sys.exit(2)
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        logger.error("%s", exc)
        sys.exit(2)
    sys.exit(1 if counter.count else 0)


if __name__ == "__main__":
    main()
