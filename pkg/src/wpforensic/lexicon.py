"""Closed-vocabulary category lexicons (LIWC-style) and scoring.

Two on-disk formats are supported:

* a sectioned text format: ``[category]`` or ``[parent/child]`` headers
  followed by one pattern per line (``#`` starts a comment);
* the historical tab-separated ``.dic`` format: a ``%``-delimited
  header mapping numeric ids to category names, then
  ``pattern<TAB>id<TAB>id...`` body lines.

Patterns are lowercase words, either literal (``war``) or prefix
(``attack*`` — the asterisk is only valid as the final character).
A document's score for a category is the percentage of its token
positions matched by any of the category's patterns; matches percolate
to ancestor categories when a hierarchy is defined.

The four proprietary composite measures some tools report (Analytic,
Clout, Authentic, Tone) are built from unpublished formulas and are
deliberately not computed here; see :data:`SUMMARY_VARIABLES`.
"""

from __future__ import annotations

import logging
import unicodedata
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

logger = logging.getLogger(__name__)

#: Composite measures that cannot be reproduced from public information.
SUMMARY_VARIABLES = ("Analytic", "Clout", "Authentic", "Tone")


class LexiconFormatError(ValueError):
    """Raised when a lexicon file is malformed."""


@dataclass
class CategoryLexicon:
    """Named category -> pattern lists, with an optional hierarchy."""

    name: str
    categories: dict[str, list[str]]
    hierarchy: dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        parents = set(self.hierarchy.values())
        for cat, patterns in self.categories.items():
            if not cat:
                raise LexiconFormatError("empty category name")
            if not patterns and cat not in parents:
                raise LexiconFormatError(f"category {cat!r} has no patterns")
            for pat in patterns:
                if not pat or pat == "*":
                    raise LexiconFormatError(f"empty pattern in {cat!r}")
                if pat != pat.lower():
                    raise LexiconFormatError(f"pattern {pat!r} is not lowercase")
                if "*" in pat[:-1]:
                    raise LexiconFormatError(
                        f"pattern {pat!r}: '*' is only valid as the final character"
                    )
        for child, parent in self.hierarchy.items():
            if child not in self.categories or parent not in self.categories:
                raise LexiconFormatError(
                    f"hierarchy entry {child!r} -> {parent!r} names unknown categories"
                )
        self._matchers = {
            cat: _Matcher(patterns) for cat, patterns in self.categories.items()
        }

    def ancestors(self, category: str) -> list[str]:
        """Chain of parents from closest to root (cycles rejected)."""
        chain: list[str] = []
        seen = {category}
        cur = category
        while cur in self.hierarchy:
            cur = self.hierarchy[cur]
            if cur in seen:
                raise LexiconFormatError(f"hierarchy cycle at {cur!r}")
            seen.add(cur)
            chain.append(cur)
        return chain

    def match_categories(self, token: str) -> set[str]:
        """All categories (with ancestors) matching a lowercase token."""
        hits: set[str] = set()
        for cat, matcher in self._matchers.items():
            if cat not in hits and matcher.matches(token):
                hits.add(cat)
                hits.update(self.ancestors(cat))
        return hits


class _Matcher:
    """One category's compiled patterns: exact set + prefix list."""

    def __init__(self, patterns: list[str]):
        self.exact = {p for p in patterns if not p.endswith("*")}
        self.prefixes = sorted({p[:-1] for p in patterns if p.endswith("*")})

    def matches(self, token: str) -> bool:
        if token in self.exact:
            return True
        return any(token.startswith(p) for p in self.prefixes)


def load_sectioned_lexicon(path: str | Path) -> CategoryLexicon:
    """Parse the ``[category]`` sectioned format."""
    path = Path(path)
    categories: dict[str, list[str]] = {}
    hierarchy: dict[str, str] = {}
    current: str | None = None
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            parts = [p.strip() for p in line[1:-1].split("/")]
            if not all(parts):
                raise LexiconFormatError(f"{path}:{lineno}: bad section header {raw!r}")
            current = parts[-1]
            categories.setdefault(current, [])
            for child, parent in zip(parts[1:], parts):
                categories.setdefault(parent, [])
                hierarchy[child] = parent
            continue
        if current is None:
            raise LexiconFormatError(f"{path}:{lineno}: pattern before any [category]")
        categories[current].append(line.lower())
    return CategoryLexicon(path.stem, categories, hierarchy)


def load_dic_lexicon(path: str | Path) -> CategoryLexicon:
    """Parse the historical tab-separated ``.dic`` format."""
    path = Path(path)
    lines = path.read_text(encoding="utf-8-sig").splitlines()
    try:
        first = next(i for i, ln in enumerate(lines) if ln.strip())
    except StopIteration:
        raise LexiconFormatError(f"{path}: empty file") from None
    if lines[first].strip() != "%":
        raise LexiconFormatError(f"{path}: expected '%' header")
    names: dict[str, str] = {}
    body_start = None
    for i in range(first + 1, len(lines)):
        line = lines[i].strip()
        if line == "%":
            body_start = i + 1
            break
        if not line:
            continue
        fields = line.split("\t") if "\t" in line else line.split(None, 1)
        if len(fields) != 2:
            raise LexiconFormatError(f"{path}:{i + 1}: bad header line {line!r}")
        names[fields[0].strip()] = fields[1].strip()
    if body_start is None:
        raise LexiconFormatError(f"{path}: unterminated '%' header")
    categories: dict[str, list[str]] = {name: [] for name in names.values()}
    for i in range(body_start, len(lines)):
        line = lines[i].strip()
        if not line:
            continue
        fields = line.split("\t") if "\t" in line else line.split()
        pattern, ids = fields[0].lower(), fields[1:]
        if not ids:
            raise LexiconFormatError(f"{path}:{i + 1}: pattern {pattern!r} has no categories")
        for cid in ids:
            if cid not in names:
                raise LexiconFormatError(f"{path}:{i + 1}: unknown category id {cid!r}")
            categories[names[cid]].append(pattern)
    categories = {c: p for c, p in categories.items() if p}
    return CategoryLexicon(path.stem, categories)


def load_lexicon(path: str | Path) -> CategoryLexicon:
    """Sniff the format: a leading '%' line means the .dic format."""
    path = Path(path)
    for raw in path.read_text(encoding="utf-8-sig").splitlines():
        if raw.strip():
            if raw.strip() == "%":
                return load_dic_lexicon(path)
            return load_sectioned_lexicon(path)
    raise LexiconFormatError(f"{path}: empty file")


def score_document(
    tokens: list[str], lexicon: CategoryLexicon
) -> dict[str, float] | None:
    """Percent of token positions matched, per category.

    Tokens are lowercased before matching. Every category appears in
    the result (0.0 when nothing matched). An empty document has no
    defined rates and yields ``None``.
    """
    if not tokens:
        return None
    counts = {cat: 0 for cat in lexicon.categories}
    for token in tokens:
        for cat in lexicon.match_categories(token.lower()):
            counts[cat] += 1
    scale = 100.0 / len(tokens)
    return {cat: counts[cat] * scale for cat in counts}


def group_means(
    reports: dict[str, dict[str, float] | None],
    grouping: dict[str, str],
) -> dict[str, dict[str, float]]:
    """Mean category rates per group plus an ``All`` row.

    Documents whose score is undefined (``None``) are excluded.
    """
    defined = {doc: rep for doc, rep in reports.items() if rep is not None}
    if not defined:
        return {}
    cats = sorted({c for rep in defined.values() for c in rep})
    buckets: dict[str, list[dict[str, float]]] = {"All": []}
    for doc, rep in defined.items():
        buckets["All"].append(rep)
        buckets.setdefault(grouping[doc], []).append(rep)
    return {
        group: {
            cat: float(np.mean([rep[cat] for rep in reps if cat in rep]))
            for cat in cats
            if any(cat in rep for rep in reps)
        }
        for group, reps in buckets.items()
    }


def site_correlation(
    reports: dict[str, dict[str, float] | None],
    site_labels: dict[str, str],
    positive_site: str,
) -> dict[str, float]:
    """Point-biserial correlation of each category with a site indicator.

    The indicator is 1 for documents from ``positive_site`` and 0
    otherwise (exactly two sites must be present). Point-biserial r is
    Pearson's r against the binary indicator. Categories with zero
    variance across documents are omitted.
    """
    docs = [d for d, rep in reports.items() if rep is not None]
    sites = {site_labels[d] for d in docs}
    if len(sites) != 2 or positive_site not in sites:
        raise ValueError(
            f"need documents from exactly two sites including {positive_site!r}, "
            f"got {sorted(sites)}"
        )
    indicator = np.array(
        [1.0 if site_labels[d] == positive_site else 0.0 for d in docs]
    )
    out: dict[str, float] = {}
    cats = sorted({c for d in docs for c in reports[d]})
    for cat in cats:
        values = np.array([reports[d][cat] for d in docs], dtype=np.float64)
        if values.std() == 0.0 or indicator.std() == 0.0:
            logger.warning("category %r has zero variance; omitted", cat)
            continue
        out[cat] = float(np.corrcoef(indicator, values)[0, 1])
    return out


_PUNCT_CLASSES: list[tuple[str, frozenset[str]]] = [
    ("Period", frozenset(".")),
    ("Comma", frozenset(",")),
    ("Colon", frozenset(":")),
    ("SemiC", frozenset(";")),
    ("QMark", frozenset("?")),
    ("Exclam", frozenset("!")),
    ("Dash", frozenset("-–—")),
    ("Quote", frozenset('"“”«»')),
    ("Apostro", frozenset("'’‘")),
]


def punctuation_rates(text: str, word_count: int) -> dict[str, float] | None:
    """Punctuation marks per 100 words, counted directly from the text.

    Classes follow the conventional report: Period, Comma, Colon,
    SemiC, QMark, Exclam, Dash, Quote, Apostro, Parenth (pairs, i.e.
    opening+closing counted once), OtherP (any other Unicode
    punctuation), and AllPunc (every punctuation character).
    ``word_count == 0`` yields ``None`` (rates undefined).
    """
    if word_count <= 0:
        return None
    counts = {name: 0 for name, _ in _PUNCT_CLASSES}
    parens = 0
    other = 0
    total = 0
    for ch in text:
        if not unicodedata.category(ch).startswith("P"):
            continue
        total += 1
        if ch in "()":
            parens += 1
            continue
        for name, chars in _PUNCT_CLASSES:
            if ch in chars:
                counts[name] += 1
                break
        else:
            other += 1
    scale = 100.0 / word_count
    out = {name: counts[name] * scale for name, _ in _PUNCT_CLASSES}
    out["Parenth"] = (parens / 2) * scale
    out["OtherP"] = other * scale
    out["AllPunc"] = total * scale
    return out
