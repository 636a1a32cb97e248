"""Static SVG chart rendering for report tables.

Charts are plain artifacts: each rendering is byte-deterministic for
identical inputs (fixed hash salt, no embedded timestamps), so golden
files stay stable and re-runs do not dirty a results directory.
"""

from __future__ import annotations

import logging
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

logger = logging.getLogger(__name__)

_SAVE_KWARGS = {"format": "svg", "metadata": {"Date": None}}

plt.rcParams["svg.hashsalt"] = "wpforensic"


def _save(fig, out_path: Path) -> None:
    out_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out_path, **_SAVE_KWARGS)
    plt.close(fig)


def stacked_monthly_chart(
    rows: list[tuple[str, str, str, int]],
    out_path: str | Path,
    title: str = "Articles per month",
) -> Path | None:
    """Stacked bar chart of monthly counts, one segment per language.

    ``rows`` are (site, language, year-month, count); sites are drawn
    side by side in one figure. An empty table renders nothing and
    returns None.
    """
    out_path = Path(out_path)
    if not rows:
        logger.info("empty monthly table; chart %s skipped", out_path.name)
        return None
    months = sorted({r[2] for r in rows})
    langs = sorted({r[1] for r in rows})
    sites = sorted({r[0] for r in rows})
    index = {m: i for i, m in enumerate(months)}
    fig, axes = plt.subplots(
        1, len(sites), figsize=(max(6.0, 1.0 + 0.5 * len(months)) * len(sites), 4.0),
        squeeze=False,
    )
    for ax, site in zip(axes[0], sites):
        bottoms = [0.0] * len(months)
        for lang in langs:
            heights = [0.0] * len(months)
            for r_site, r_lang, r_month, count in rows:
                if r_site == site and r_lang == lang:
                    heights[index[r_month]] = count
            if any(heights):
                ax.bar(range(len(months)), heights, bottom=bottoms, label=lang)
                bottoms = [b + h for b, h in zip(bottoms, heights)]
        ax.set_title(f"{title} — {site}")
        ax.set_xticks(range(len(months)))
        ax.set_xticklabels(months, rotation=45, ha="right")
        ax.set_ylabel("articles")
        ax.legend(title="language")
    fig.tight_layout()
    _save(fig, out_path)
    return out_path


def histogram_chart(
    hist: dict[int, int],
    out_path: str | Path,
    title: str = "Topics per article",
    xlabel: str = "topics assigned",
) -> Path | None:
    """Bar chart of an integer-valued histogram; empty input → no file."""
    out_path = Path(out_path)
    if not hist:
        logger.info("empty histogram; chart %s skipped", out_path.name)
        return None
    xs = sorted(hist)
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.bar(xs, [hist[x] for x in xs])
    ax.set_title(title)
    ax.set_xlabel(xlabel)
    ax.set_ylabel("articles")
    ax.set_xticks(xs)
    fig.tight_layout()
    _save(fig, out_path)
    return out_path
