"""Turn harvested snapshots into a structured article corpus.

Extraction is config-driven: each site gets CSS selectors for its
language-picker widget, image captions, and boilerplate blocks
(share bars, related-post widgets) that must not count as body text.
Paragraphs come from leaf block elements of the rendered content
fragment; captions and boilerplate are dropped before text, link, and
paragraph collection. Malformed markup never aborts an extraction.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from urllib.parse import urlsplit, urlunsplit

import yaml

from .corpus import LANGUAGES, Article, ArticleKey, Corpus
from .harvest import RawPost, parse_raw_post
from .htmldom import Element, parse_html, squash_ws

logger = logging.getLogger(__name__)

BLOCK_TAGS = frozenset({"p", "h1", "h2", "h3", "h4", "h5", "h6", "li", "blockquote"})

DEFAULT_PICKER = (
    "ul.language-chooser a[hreflang], .lang-switcher a[hreflang], "
    ".polylang-switcher a[hreflang]"
)
DEFAULT_CAPTIONS = ("figcaption", ".wp-caption-text", ".wp-element-caption")
DEFAULT_EXCLUDE = (
    ".sharedaddy",
    ".jp-relatedposts",
    ".related-posts",
    ".social-share",
    ".post-navigation",
)


@dataclass
class SiteExtractConfig:
    site_id: str
    default_language: str = "en"
    picker: str = DEFAULT_PICKER
    captions: tuple[str, ...] = DEFAULT_CAPTIONS
    exclude: tuple[str, ...] = DEFAULT_EXCLUDE

    def __post_init__(self) -> None:
        if self.default_language not in LANGUAGES:
            raise ValueError(f"unknown default language {self.default_language!r}")


def load_extract_config(path: str | Path) -> dict[str, SiteExtractConfig]:
    """Load per-site extraction settings from YAML.

    The file holds an optional ``defaults`` mapping and a ``sites``
    mapping of site_id to overrides; recognized keys are
    ``default_language``, ``picker`` (selector string), ``captions``
    and ``exclude`` (selector lists).
    """
    data = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
    defaults = data.get("defaults") or {}
    sites = data.get("sites") or {}
    if not isinstance(sites, dict):
        raise ValueError("config 'sites' must be a mapping")

    def build(site_id: str, overrides: dict | None) -> SiteExtractConfig:
        merged = dict(defaults)
        merged.update(overrides or {})
        return SiteExtractConfig(
            site_id=site_id,
            default_language=merged.get("default_language", "en"),
            picker=merged.get("picker", DEFAULT_PICKER),
            captions=tuple(merged.get("captions", DEFAULT_CAPTIONS)),
            exclude=tuple(merged.get("exclude", DEFAULT_EXCLUDE)),
        )

    return {site_id: build(site_id, overrides) for site_id, overrides in sites.items()}


def site_config_or_default(
    configs: dict[str, SiteExtractConfig], site_id: str
) -> SiteExtractConfig:
    if site_id in configs:
        return configs[site_id]
    logger.warning("no extraction config for site %r; using defaults", site_id)
    return SiteExtractConfig(site_id=site_id)


@dataclass
class SiteMeta:
    """Id -> name maps from a snapshot's meta files."""

    users: dict[int, str] = field(default_factory=dict)
    categories: dict[int, str] = field(default_factory=dict)
    tags: dict[int, str] = field(default_factory=dict)

    @classmethod
    def load(cls, meta_dir: Path) -> "SiteMeta":
        def read(name: str) -> dict[int, str]:
            path = meta_dir / f"{name}.json"
            if not path.exists():
                logger.warning("missing %s; names will fall back to ids", path)
                return {}
            try:
                items = json.loads(path.read_text(encoding="utf-8"))
            except ValueError as exc:
                logger.warning("unreadable %s (%s); names fall back to ids", path, exc)
                return {}
            return {int(x["id"]): str(x.get("name", x["id"])) for x in items if "id" in x}

        return cls(read("users"), read("categories"), read("tags"))


def language_from_url(url: str, default: str = "en") -> str:
    """Infer language from the URL's leading path segment."""
    path = urlsplit(url).path
    for segment in path.split("/"):
        if segment:
            return segment.lower() if segment.lower() in LANGUAGES else default
    return default


def _decode_page(page_html: bytes, context: str) -> str:
    try:
        return page_html.decode("utf-8")
    except UnicodeDecodeError:
        logger.warning("%s: undecodable bytes replaced with U+FFFD", context)
        return page_html.decode("utf-8", errors="replace")


def extract_translations(
    page_html: bytes | str,
    config: SiteExtractConfig,
    self_language: str | None = None,
) -> list[tuple[str, str]]:
    """Language-picker links of a rendered page as ``(language, url)``.

    The language comes from the anchor's ``hreflang`` (region subtags
    stripped) or, failing that, the link URL's path prefix. Unknown
    codes and the page's own language are skipped; duplicate languages
    keep the first link and warn.
    """
    markup = page_html if isinstance(page_html, str) else _decode_page(page_html, "picker")
    root = parse_html(markup)
    refs: list[tuple[str, str]] = []
    seen: dict[str, str] = {}
    for anchor in root.select(config.picker):
        href = anchor.attrs.get("href", "").strip()
        if not href:
            continue
        hreflang = anchor.attrs.get("hreflang", "").strip().lower()
        lang = hreflang.split("-")[0] if hreflang else ""
        if lang == "x" or lang not in LANGUAGES:
            lang = language_from_url(href, default="")
        if lang not in LANGUAGES:
            logger.warning("picker link %r has no recognizable language; skipped", href)
            continue
        if lang == self_language:
            continue
        if lang in seen:
            if seen[lang] != href:
                logger.warning("duplicate picker language %r; keeping first link", lang)
            continue
        seen[lang] = href
        refs.append((lang, href))
    return refs


def _leaf_blocks(root: Element) -> list[Element]:
    out = []
    for node in root.iter():
        if node.tag in BLOCK_TAGS and not any(
            child.tag in BLOCK_TAGS for child in node.iter()
        ):
            out.append(node)
    return out


def extract_article(
    raw: RawPost,
    page_html: bytes | None,
    config: SiteExtractConfig,
    meta: SiteMeta | None = None,
) -> Article:
    """Build a structured Article from one harvested post.

    Empty rendered content yields an article with no paragraphs plus a
    warning; it is still returned so the post stays accounted for.
    """
    meta = meta or SiteMeta()
    content = parse_html(raw.content_html)
    for selector in config.exclude:
        for node in content.select(selector):
            node.detach()

    image_urls: list[str] = []
    for img in content.select("img[src]"):
        src = img.attrs.get("src", "").strip()
        if src and src not in image_urls:
            image_urls.append(src)

    for selector in config.captions:
        for node in content.select(selector):
            node.detach()

    paragraphs = [squash_ws(node.text) for node in _leaf_blocks(content)]
    paragraphs = [p for p in paragraphs if p]
    if not paragraphs:
        leftover = squash_ws(content.text)
        if leftover:
            paragraphs = [leftover]
        else:
            logger.warning("post %s/%s has no body text", config.site_id, raw.id)

    links = []
    for anchor in content.select("a[href]"):
        href = anchor.attrs.get("href", "").strip()
        if href:
            links.append((squash_ws(anchor.text), href))

    language = language_from_url(raw.link, config.default_language)
    translation_refs: list[tuple[str, str]] = []
    if page_html is not None:
        translation_refs = extract_translations(page_html, config, language)

    return Article(
        site_id=config.site_id,
        post_id=raw.id,
        url=raw.link,
        language=language,
        title=squash_ws(parse_html(raw.title_html).text),
        paragraphs=paragraphs,
        links=links,
        image_urls=image_urls,
        categories=[meta.categories.get(c, str(c)) for c in raw.categories],
        tags=[meta.tags.get(t, str(t)) for t in raw.tags],
        author_name=meta.users.get(raw.author, ""),
        date_gmt=raw.date_gmt,
        modified_gmt=raw.modified_gmt,
        translation_refs=translation_refs,
    )


_POST_FILE_RE = re.compile(r"^(\d+)\.json$")


def extract_snapshot(
    snapshot_root: str | Path,
    configs: dict[str, SiteExtractConfig],
) -> Corpus:
    """Extract every site under a snapshot root into one corpus.

    Sites and posts are processed in sorted order so output is
    deterministic. Unreadable post files are skipped with a warning.
    """
    snapshot_root = Path(snapshot_root)
    corpus = Corpus()
    site_dirs = sorted(
        d for d in snapshot_root.iterdir() if d.is_dir() and (d / "posts").is_dir()
    )
    if not site_dirs:
        raise ValueError(f"no site snapshots under {snapshot_root}")
    for site_dir in site_dirs:
        site_id = site_dir.name
        config = site_config_or_default(configs, site_id)
        meta = SiteMeta.load(site_dir / "meta")
        post_files = sorted(
            (int(m.group(1)), p)
            for p in (site_dir / "posts").iterdir()
            if (m := _POST_FILE_RE.match(p.name))
        )
        for post_id, path in post_files:
            try:
                raw = parse_raw_post(path.read_bytes())
            except (ValueError, KeyError) as exc:
                logger.warning("skipping unreadable post file %s (%s)", path, exc)
                continue
            page_path = site_dir / "pages" / f"{post_id}.html"
            page_html = page_path.read_bytes() if page_path.exists() else None
            corpus.add(extract_article(raw, page_html, config, meta))
    return corpus


@dataclass
class TranslationGroup:
    """One multilingual article group (language -> article key)."""

    group_id: str
    members: dict[str, ArticleKey]
    orphaned: bool


@dataclass
class ConflictReport:
    kind: str  # "duplicate_language" | "dangling_ref"
    source: ArticleKey
    language: str
    detail: str


class UnionFind:
    def __init__(self):
        self.parent: dict = {}
        self.size: dict = {}

    def find(self, x):
        self.parent.setdefault(x, x)
        self.size.setdefault(x, 1)
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]


def normalize_url(url: str) -> str:
    """Canonical form for matching translation links to articles."""
    parts = urlsplit(url.strip())
    path = parts.path.rstrip("/") or "/"
    return urlunsplit((parts.scheme.lower(), parts.netloc.lower(), path, parts.query, ""))


def resolve_translation_groups(
    corpus: Corpus,
) -> tuple[list[TranslationGroup], list[ConflictReport]]:
    """Union articles linked by their language pickers into groups.

    Every article ends up in exactly one group. Dangling references
    (to URLs not in the corpus) and duplicate languages within a group
    (first key kept) are returned as conflict reports.
    """
    index: dict[str, ArticleKey] = {}
    for article in corpus:
        index.setdefault(normalize_url(article.url), article.key)

    uf = UnionFind()
    conflicts: list[ConflictReport] = []
    for article in corpus:
        uf.find(article.key)
        for lang, url in article.translation_refs:
            target = index.get(normalize_url(url))
            if target is None:
                conflicts.append(
                    ConflictReport("dangling_ref", article.key, lang, url)
                )
                continue
            uf.union(article.key, target)

    components: dict[ArticleKey, list[ArticleKey]] = {}
    for article in corpus:
        components.setdefault(uf.find(article.key), []).append(article.key)

    groups: list[TranslationGroup] = []
    for keys in sorted(components.values(), key=lambda ks: min(ks)):
        keys.sort()
        members: dict[str, ArticleKey] = {}
        for key in keys:
            lang = corpus[key].language
            if lang in members:
                conflicts.append(
                    ConflictReport(
                        "duplicate_language",
                        key,
                        lang,
                        f"group already has {members[lang][0]}:{members[lang][1]}",
                    )
                )
                continue
            members[lang] = key
        first = keys[0]
        orphaned = len(keys) == 1 and not corpus[first].translation_refs
        groups.append(
            TranslationGroup(f"{first[0]}:{first[1]}", members, orphaned)
        )
    return groups, conflicts
