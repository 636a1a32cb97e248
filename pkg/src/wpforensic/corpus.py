"""Canonical article data model plus the text primitives shared by every analysis:
timezone conversion, sentence splitting, tokenization, cross-site duplicate
detection and Cyrillic-character findings.
"""

from __future__ import annotations

import json
import logging
import re
import unicodedata
from dataclasses import dataclass, field, replace
from datetime import datetime, timedelta, timezone
from importlib import resources
from pathlib import Path
from typing import Iterable, Iterator

logger = logging.getLogger(__name__)

LANGUAGES = ("ar", "de", "en", "es", "fr", "it", "zh")

#: Moscow time is fixed UTC+3 (no DST transitions since 2014).
MSK = timezone(timedelta(hours=3), "MSK")

ArticleKey = tuple[str, int]


class CorpusFormatError(ValueError):
    """Raised when a corpus JSONL file cannot be parsed."""


# ---------------------------------------------------------------------------
# Data model
# ---------------------------------------------------------------------------


@dataclass
class Article:
    """One extracted, cleaned article (a single language version of a story)."""

    site_id: str
    post_id: int
    url: str
    language: str
    title: str
    paragraphs: list[str]
    links: list[tuple[str, str]] = field(default_factory=list)
    image_urls: list[str] = field(default_factory=list)
    categories: list[str] = field(default_factory=list)
    tags: list[str] = field(default_factory=list)
    author_name: str = ""
    date_gmt: datetime | None = None
    modified_gmt: datetime | None = None
    translation_refs: list[tuple[str, str]] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.language not in LANGUAGES:
            raise ValueError(f"unknown language code {self.language!r}")

    @property
    def key(self) -> ArticleKey:
        return (self.site_id, self.post_id)

    @property
    def text(self) -> str:
        """Cleaned article body: paragraphs joined by newline, no markup."""
        return "\n".join(self.paragraphs)

    # Moscow-time views are derived, never stored, so the +3h relation
    # cannot drift out of sync with the GMT fields.
    @property
    def date_msk(self) -> datetime | None:
        return to_moscow(self.date_gmt) if self.date_gmt else None

    @property
    def modified_msk(self) -> datetime | None:
        return to_moscow(self.modified_gmt) if self.modified_gmt else None


@dataclass(frozen=True)
class Sentence:
    """One sentence of an article, with its position and raw token count."""

    site_id: str
    post_id: int
    ordinal: int
    text: str
    token_count: int

    @property
    def article_key(self) -> ArticleKey:
        return (self.site_id, self.post_id)

    @property
    def key(self) -> str:
        """Stable id used to join sentences with external embedding files."""
        return f"{self.site_id}:{self.post_id}:{self.ordinal}"


@dataclass(frozen=True)
class DuplicatePair:
    a: ArticleKey
    b: ArticleKey


@dataclass
class CyrillicFinding:
    """A maximal Cyrillic passage found inside a non-Cyrillic article.

    Adjacent Cyrillic words merge into one finding (see
    :func:`detect_cyrillic`); ``text`` is the exact ``[start:end)`` slice.
    """

    site_id: str
    post_id: int
    start: int
    end: int
    text: str
    context: str
    suggested_category: str  # accidental | forgotten_or_intentional
    final_category: str = "unannotated"


class Corpus:
    """Immutable-by-convention article collection with deterministic iteration.

    Iteration order is (site_id, post_id) ascending; lookups by key or URL.
    """

    def __init__(self, articles: Iterable[Article] = ()):
        self._by_key: dict[ArticleKey, Article] = {}
        self._by_url: dict[str, Article] = {}
        for article in articles:
            self.add(article)

    def add(self, article: Article) -> None:
        if article.key in self._by_key:
            raise ValueError(f"duplicate article key {article.key}")
        if article.url in self._by_url:
            raise ValueError(f"duplicate article URL {article.url}")
        self._by_key[article.key] = article
        self._by_url[article.url] = article

    def __len__(self) -> int:
        return len(self._by_key)

    def __iter__(self) -> Iterator[Article]:
        for key in sorted(self._by_key):
            yield self._by_key[key]

    def __contains__(self, key: ArticleKey) -> bool:
        return key in self._by_key

    def __getitem__(self, key: ArticleKey) -> Article:
        return self._by_key[key]

    def get(self, key: ArticleKey) -> Article | None:
        return self._by_key.get(key)

    def by_url(self, url: str) -> Article | None:
        return self._by_url.get(url)

    @property
    def sites(self) -> list[str]:
        return sorted({a.site_id for a in self._by_key.values()})

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Corpus):
            return NotImplemented
        return list(self) == list(other)


# ---------------------------------------------------------------------------
# Timezone conversion
# ---------------------------------------------------------------------------


def to_moscow(ts_gmt: datetime) -> datetime:
    """Convert a UTC timestamp to Moscow local time (fixed UTC+3, no DST).

    Naive inputs are taken to be UTC, which is how the WordPress API reports
    the *_gmt fields.
    """
    if ts_gmt.tzinfo is None:
        ts_gmt = ts_gmt.replace(tzinfo=timezone.utc)
    return ts_gmt.astimezone(MSK)


def from_moscow(ts_msk: datetime) -> datetime:
    """Inverse of :func:`to_moscow`: back to UTC."""
    if ts_msk.tzinfo is None:
        ts_msk = ts_msk.replace(tzinfo=MSK)
    return ts_msk.astimezone(timezone.utc)


# ---------------------------------------------------------------------------
# Tokenization
# ---------------------------------------------------------------------------

# CJK ideographs are segmented one codepoint per token; everything else uses
# word-character runs with apostrophes/hyphens allowed word-internally.
_CJK = "㐀-䶿一-鿿豈-﫿"
_TOKEN_RE = re.compile(
    rf"(?P<cjk>[{_CJK}])|(?P<word>[^\W_{_CJK}]+(?:['’\-][^\W_{_CJK}]+)*)"
)

_STOPWORDS: frozenset[str] | None = None


def _load_stopwords() -> frozenset[str]:
    global _STOPWORDS
    if _STOPWORDS is None:
        text = (
            resources.files("wpforensic.data").joinpath("stopwords_en.txt").read_text("utf-8")
        )
        words = {
            line.strip()
            for line in text.splitlines()
            if line.strip() and not line.startswith("#")
        }
        _STOPWORDS = frozenset(words)
    return _STOPWORDS


def stopwords() -> frozenset[str]:
    """The bundled English stopword list (pinned data file)."""
    return _load_stopwords()


def tokenize(text: str, mode: str = "raw") -> list[str]:
    """Tokenize text.

    ``raw`` keeps case and every word token (used for token counts);
    ``analysis`` lowercases, normalizes apostrophes and drops stopwords
    (punctuation never forms a token under either mode).
    """
    if mode not in ("raw", "analysis"):
        raise ValueError(f"unknown tokenize mode {mode!r}")
    tokens = [m.group(0) for m in _TOKEN_RE.finditer(text)]
    if mode == "raw":
        return tokens
    stops = _load_stopwords()
    out = []
    for tok in tokens:
        tok = tok.lower().replace("’", "'")
        if tok not in stops:
            out.append(tok)
    return out


# ---------------------------------------------------------------------------
# Sentence splitting
# ---------------------------------------------------------------------------

# Sentence-final punctuation; newline is handled separately as a hard break.
_DELIMITERS = ".!?…。！？"
_CLOSERS = "\"'’”\xbb)」』]"

# Tokens that end with a period without ending the sentence.
_ABBREVIATIONS = frozenset(
    """
    mr mrs ms dr prof rev gen col sgt lt capt st jr sr vs etc al cf approx
    dept est fig figs no nos vol pp inc ltd co corp mt
    e.g i.e u.s u.k u.n e.u a.m p.m
    """.split()
)

_WORDISH_RE = re.compile(rf"[^\W_{_CJK}]|[{_CJK}]")


def _guard_abbreviation(line: str, dot_index: int) -> bool:
    """True when the period at ``dot_index`` follows a guarded abbreviation."""
    i = dot_index - 1
    while i >= 0 and (line[i].isalnum() or line[i] == "."):
        i -= 1
    candidate = line[i + 1 : dot_index].strip(".").lower()
    if not candidate:
        return False
    if candidate in _ABBREVIATIONS:
        return True
    # Single-letter initials ("J. Smith").
    return len(candidate) == 1 and candidate.isalpha()


def _split_line(line: str) -> list[str]:
    """Split one newline-free line into sentence strings."""
    segments: list[str] = []
    start = 0
    i = 0
    n = len(line)
    while i < n:
        ch = line[i]
        if ch in _DELIMITERS:
            run_start = i
            while i < n and line[i] in _DELIMITERS:
                i += 1
            # A lone period after a known abbreviation does not split.
            if line[run_start:i] == "." and _guard_abbreviation(line, run_start):
                continue
            while i < n and line[i] in _CLOSERS:
                i += 1
            segments.append(line[start:i])
            start = i
        else:
            i += 1
    if start < n:
        segments.append(line[start:])

    # Merge segments that carry no word characters (stray punctuation) into a
    # neighbour so no non-whitespace text is lost.
    merged: list[str] = []
    pending = ""
    for seg in segments:
        if not seg.strip():
            continue
        if _WORDISH_RE.search(seg):
            if pending:
                seg = pending + seg
                pending = ""
            merged.append(seg)
        elif merged:
            merged[-1] += seg
        else:
            pending += seg
    # A line with no word characters at all is dropped.
    return [s.strip() for s in merged]


def split_sentences(article: Article) -> list[Sentence]:
    """Split an article's text into sentences.

    Rule-based: sentence-final punctuation (. ! ? and CJK equivalents) ends a
    sentence, newline is a hard delimiter, and an abbreviation guard list
    prevents splits after common abbreviations. Lines containing no word
    characters are not emitted.
    """
    sentences: list[Sentence] = []
    ordinal = 0
    for line in article.text.split("\n"):
        for seg in _split_line(line):
            count = len(tokenize(seg, "raw"))
            if count == 0:
                continue
            sentences.append(
                Sentence(article.site_id, article.post_id, ordinal, seg, count)
            )
            ordinal += 1
    return sentences


def split_text(text: str) -> list[str]:
    """Sentence-split a bare string (same rules as :func:`split_sentences`)."""
    out: list[str] = []
    for line in text.split("\n"):
        out.extend(s for s in _split_line(line) if tokenize(s, "raw"))
    return out


# ---------------------------------------------------------------------------
# Cross-site duplicates
# ---------------------------------------------------------------------------

_QUOTE_MAP = str.maketrans(
    {
        "\xab": '"',
        "\xbb": '"',
        "“": '"',
        "”": '"',
        "„": '"',
        "‟": '"',
        "‘": "'",
        "’": "'",
        "‚": "'",
        "‛": "'",
    }
)


def normalize_text(text: str) -> str:
    """Normalization used for duplicate detection.

    NFC form, typographic quotes and guillemets mapped to ASCII quotes,
    whitespace collapsed, ends trimmed.
    """
    text = unicodedata.normalize("NFC", text)
    text = text.translate(_QUOTE_MAP)
    return re.sub(r"\s+", " ", text).strip()


def find_cross_site_duplicates(corpus: Corpus) -> list[DuplicatePair]:
    """Pairs of articles on *different* sites whose normalized text is equal."""
    buckets: dict[str, list[ArticleKey]] = {}
    for article in corpus:
        if not article.text.strip():
            continue
        buckets.setdefault(normalize_text(article.text), []).append(article.key)
    pairs = []
    for keys in buckets.values():
        for i in range(len(keys)):
            for j in range(i + 1, len(keys)):
                if keys[i][0] != keys[j][0]:
                    a, b = sorted((keys[i], keys[j]))
                    pairs.append(DuplicatePair(a, b))
    return sorted(pairs, key=lambda p: (p.a, p.b))


# ---------------------------------------------------------------------------
# Cyrillic findings
# ---------------------------------------------------------------------------

# One finding spans consecutive Cyrillic words: runs of Cyrillic codepoints
# joined across intervening spaces and word-level punctuation, so a whole
# leftover Russian phrase reports once. Sentence-final punctuation is not a
# joiner, keeping adjacent sentences as separate findings.
_CYRILLIC_JOINERS = r"\s,;:()\"'«»„“”—–\-"
_CYRILLIC_RUN_RE = re.compile(rf"[Ѐ-ӿ]+(?:[{_CYRILLIC_JOINERS}]+[Ѐ-ӿ]+)*")
_CONTEXT_CHARS = 40


def _is_latin_letter(ch: str) -> bool:
    return ch.isalpha() and not ("Ѐ" <= ch <= "ӿ")


def detect_cyrillic(article: Article) -> list[CyrillicFinding]:
    """Report maximal Cyrillic passages in the article text.

    A passage is one or more runs of Cyrillic codepoints, merged across
    spaces and word punctuation, so a forgotten Russian phrase is a single
    multi-word finding. A single Cyrillic character embedded inside an
    otherwise-Latin word is the homoglyph pattern and suggested
    ``accidental``; anything longer is ``forgotten_or_intentional``.
    Final categories come from a
    separate annotation file (see :func:`apply_cyrillic_annotations`).
    """
    text = article.text
    findings = []
    for m in _CYRILLIC_RUN_RE.finditer(text):
        start, end = m.span()
        prev_ch = text[start - 1] if start > 0 else ""
        next_ch = text[end] if end < len(text) else ""
        embedded = (prev_ch and _is_latin_letter(prev_ch)) or (
            next_ch and _is_latin_letter(next_ch)
        )
        category = (
            "accidental" if end - start == 1 and embedded else "forgotten_or_intentional"
        )
        findings.append(
            CyrillicFinding(
                site_id=article.site_id,
                post_id=article.post_id,
                start=start,
                end=end,
                text=m.group(0),
                context=text[max(0, start - _CONTEXT_CHARS) : end + _CONTEXT_CHARS],
                suggested_category=category,
            )
        )
    return findings


FINAL_CYRILLIC_CATEGORIES = (
    "accidental",
    "forgotten",
    "intentional",
    "unclear",
    "unannotated",
)


def apply_cyrillic_annotations(
    findings: list[CyrillicFinding], annotations_csv: Path
) -> list[CyrillicFinding]:
    """Assign final categories from a reviewer-edited CSV.

    CSV columns: site_id,post_id,start,end,category. Unmatched findings stay
    ``unannotated``; unknown categories raise.
    """
    import csv

    table: dict[tuple[str, int, int, int], str] = {}
    with open(annotations_csv, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            category = row["category"].strip()
            if category not in FINAL_CYRILLIC_CATEGORIES:
                raise ValueError(f"unknown Cyrillic category {category!r}")
            table[(row["site_id"], int(row["post_id"]), int(row["start"]), int(row["end"]))] = (
                category
            )
    out = []
    for f in findings:
        final = table.get((f.site_id, f.post_id, f.start, f.end), f.final_category)
        out.append(replace(f, final_category=final))
    return out


# ---------------------------------------------------------------------------
# JSONL persistence
# ---------------------------------------------------------------------------

_ISO = "%Y-%m-%dT%H:%M:%S%z"


def _dt_out(dt: datetime | None) -> str | None:
    return dt.isoformat() if dt else None


def _dt_in(value: str | None) -> datetime | None:
    return datetime.fromisoformat(value) if value else None


def article_to_dict(article: Article) -> dict:
    """Stable-field-order dict for the documented corpus.jsonl format."""
    return {
        "site_id": article.site_id,
        "post_id": article.post_id,
        "url": article.url,
        "language": article.language,
        "title": article.title,
        "paragraphs": article.paragraphs,
        "links": [list(pair) for pair in article.links],
        "image_urls": article.image_urls,
        "categories": article.categories,
        "tags": article.tags,
        "author_name": article.author_name,
        "date_gmt": _dt_out(article.date_gmt),
        "modified_gmt": _dt_out(article.modified_gmt),
        "date_msk": _dt_out(article.date_msk),
        "modified_msk": _dt_out(article.modified_msk),
        "translation_refs": [list(pair) for pair in article.translation_refs],
    }


def article_from_dict(data: dict) -> Article:
    return Article(
        site_id=data["site_id"],
        post_id=data["post_id"],
        url=data["url"],
        language=data["language"],
        title=data["title"],
        paragraphs=list(data["paragraphs"]),
        links=[tuple(pair) for pair in data.get("links", [])],
        image_urls=list(data.get("image_urls", [])),
        categories=list(data.get("categories", [])),
        tags=list(data.get("tags", [])),
        author_name=data.get("author_name", ""),
        date_gmt=_dt_in(data.get("date_gmt")),
        modified_gmt=_dt_in(data.get("modified_gmt")),
        translation_refs=[tuple(pair) for pair in data.get("translation_refs", [])],
    )


def save_corpus(corpus: Corpus, path: Path | str) -> None:
    """Write one Article per line as UTF-8 JSON with stable field order."""
    path = Path(path)
    with open(path, "w", encoding="utf-8") as fh:
        for article in corpus:
            fh.write(json.dumps(article_to_dict(article), ensure_ascii=False))
            fh.write("\n")


def load_corpus(path: Path | str) -> Corpus:
    """Read a corpus.jsonl file; malformed lines raise with their line number."""
    corpus = Corpus()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                corpus.add(article_from_dict(json.loads(line)))
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise CorpusFormatError(f"{path}: line {lineno}: {exc}") from exc
    return corpus
