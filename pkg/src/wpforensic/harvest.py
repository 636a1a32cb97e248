"""WordPress REST API harvesting into a reproducible on-disk snapshot.

A snapshot of one site lives under ``<out>/<site_id>/``::

    posts/<id>.json    verbatim JSON bytes of the post, as served
    pages/<id>.html    raw rendered page bytes (when fetchable)
    meta/users.json    merged arrays from the users/categories/tags
    meta/categories.json                                 endpoints
    meta/tags.json
    manifest.json      file checksums, counters, failures

Re-running against a complete, intact snapshot performs no network
requests at all; partial snapshots are resumed, re-fetching only what
is missing or corrupt. All requests share one rate limiter, so
concurrent page fetches never exceed the configured request rate.
"""

from __future__ import annotations

import hashlib
import json
import logging
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from urllib.parse import urlsplit

import requests

logger = logging.getLogger(__name__)

DEFAULT_USER_AGENT = "wpforensic/0.1 (+research crawler)"

#: Failure kinds that will not succeed on retry or resume.
PERMANENT_KINDS = frozenset({"http_4xx"})


class FetchError(Exception):
    """A request failed permanently or exhausted its retries."""

    def __init__(self, url: str, kind: str, detail: str):
        super().__init__(f"{kind} fetching {url}: {detail}")
        self.url = url
        self.kind = kind
        self.detail = detail


@dataclass
class RetryPolicy:
    max_retries: int = 3
    backoff_base: float = 0.5  # seconds; doubles per attempt

    def delay(self, attempt: int) -> float:
        return self.backoff_base * (2**attempt)


@dataclass
class SiteConfig:
    site_id: str
    base_url: str
    page_size: int = 100
    rate_limit: float = 2.0  # requests per second, shared across threads
    user_agent: str = DEFAULT_USER_AGENT
    timeout: float = 30.0
    concurrency: int = 4
    retry: RetryPolicy = field(default_factory=RetryPolicy)

    def __post_init__(self) -> None:
        scheme = urlsplit(self.base_url).scheme
        if scheme not in ("http", "https"):
            raise ValueError(f"base_url must be http(s), got {self.base_url!r}")
        if not 1 <= self.page_size <= 100:
            raise ValueError("page_size must be within 1..100")
        if self.rate_limit <= 0:
            raise ValueError("rate_limit must be positive")
        if self.concurrency < 1:
            raise ValueError("concurrency must be >= 1")
        if not self.site_id or "/" in self.site_id:
            raise ValueError(f"bad site_id {self.site_id!r}")

    def api(self, endpoint: str) -> str:
        return f"{self.base_url.rstrip('/')}/wp-json/wp/v2/{endpoint}"


@dataclass
class RawPost:
    """One post as served by ``/wp-json/wp/v2/posts``.

    ``raw_json`` holds the verbatim byte slice of this post's element
    in the listing response (assumed UTF-8), so snapshots preserve the
    server's exact representation.
    """

    id: int
    date_gmt: datetime
    modified_gmt: datetime
    slug: str
    link: str
    title_html: str
    content_html: str
    categories: list[int]
    tags: list[int]
    author: int
    raw_json: bytes

    @classmethod
    def from_api(cls, obj: dict, raw_json: bytes) -> "RawPost":
        return cls(
            id=int(obj["id"]),
            date_gmt=parse_wp_datetime(obj["date_gmt"]),
            modified_gmt=parse_wp_datetime(obj.get("modified_gmt") or obj["date_gmt"]),
            slug=obj.get("slug", ""),
            link=obj.get("link", ""),
            title_html=(obj.get("title") or {}).get("rendered", ""),
            content_html=(obj.get("content") or {}).get("rendered", ""),
            categories=[int(x) for x in obj.get("categories") or []],
            tags=[int(x) for x in obj.get("tags") or []],
            author=int(obj.get("author") or 0),
            raw_json=raw_json,
        )


def parse_wp_datetime(value: str) -> datetime:
    """Parse a WordPress GMT timestamp to a naive UTC datetime."""
    dt = datetime.fromisoformat(value.replace("Z", "+00:00"))
    if dt.tzinfo is not None:
        dt = dt.astimezone(timezone.utc).replace(tzinfo=None)
    return dt


def parse_raw_post(data: bytes) -> RawPost:
    """Rebuild a RawPost from stored verbatim bytes."""
    return RawPost.from_api(json.loads(data), data)


def iter_json_array(text: str):
    """Yield ``(object, verbatim_slice)`` per element of a JSON array."""
    decoder = json.JSONDecoder()
    idx = 0
    while idx < len(text) and text[idx] in " \t\r\n﻿":
        idx += 1
    if idx >= len(text) or text[idx] != "[":
        raise ValueError("response is not a JSON array")
    idx += 1
    while True:
        while idx < len(text) and text[idx] in " \t\r\n,":
            idx += 1
        if idx >= len(text) or text[idx] == "]":
            return
        obj, end = decoder.raw_decode(text, idx)
        yield obj, text[idx:end]
        idx = end


class RateLimiter:
    """Spaces request starts at least ``1/rate`` seconds apart (thread-safe)."""

    def __init__(self, rate: float):
        self.interval = 1.0 / rate
        self._lock = threading.Lock()
        self._next_at = 0.0

    def acquire(self) -> None:
        while True:
            with self._lock:
                now = time.monotonic()
                if now >= self._next_at:
                    self._next_at = now + self.interval
                    return
                wait = self._next_at - now
            time.sleep(wait)


class WpClient:
    """Rate-limited, retrying HTTP client for one site."""

    def __init__(self, config: SiteConfig):
        self.config = config
        self.limiter = RateLimiter(config.rate_limit)
        self.request_count = 0
        self.retry_count = 0
        self._counter_lock = threading.Lock()
        self._local = threading.local()

    @property
    def _session(self) -> requests.Session:
        session = getattr(self._local, "session", None)
        if session is None:
            session = requests.Session()
            session.headers["User-Agent"] = self.config.user_agent
            self._local.session = session
        return session

    def request(self, url: str, params: dict | None = None) -> requests.Response:
        """GET with shared rate limiting, retries on 429/5xx/network errors.

        Other 4xx statuses are permanent: no retry, immediate
        :class:`FetchError` with kind ``http_4xx``.
        """
        retry = self.config.retry
        last_detail = ""
        for attempt in range(retry.max_retries + 1):
            if attempt:
                with self._counter_lock:
                    self.retry_count += 1
            self.limiter.acquire()
            with self._counter_lock:
                self.request_count += 1
            try:
                resp = self._session.get(
                    url, params=params, timeout=self.config.timeout
                )
            except requests.RequestException as exc:
                kind, last_detail = "network", str(exc)
            else:
                if resp.status_code < 400:
                    return resp
                if resp.status_code == 429 or resp.status_code >= 500:
                    kind = "http_429" if resp.status_code == 429 else "http_5xx"
                    last_detail = f"status {resp.status_code}"
                    retry_after = resp.headers.get("Retry-After")
                else:
                    raise FetchError(url, "http_4xx", f"status {resp.status_code}")
            if attempt == retry.max_retries:
                raise FetchError(url, kind, f"{last_detail} (retries exhausted)")
            delay = retry.delay(attempt)
            if kind == "http_429" and retry_after:
                try:
                    delay = max(delay, float(retry_after))
                except ValueError:
                    pass
            logger.warning("retrying %s after %s (%s)", url, last_detail, kind)
            time.sleep(delay)
        raise AssertionError("unreachable")

    def iter_posts(self):
        """Yield every post via paginated listing (X-WP-TotalPages)."""
        page = 1
        total_pages = None
        while total_pages is None or page <= total_pages:
            try:
                resp = self.request(
                    self.config.api("posts"),
                    {"per_page": self.config.page_size, "page": page},
                )
            except FetchError as exc:
                # Some servers 400 on a page past the end instead of
                # returning an empty array.
                if exc.kind == "http_4xx" and page > 1:
                    return
                raise
            if total_pages is None:
                header = resp.headers.get("X-WP-TotalPages")
                total_pages = int(header) if header else 1
            count = 0
            for obj, src in iter_json_array(resp.content.decode("utf-8")):
                count += 1
                yield RawPost.from_api(obj, src.encode("utf-8"))
            if count == 0:
                return
            page += 1

    def fetch_page_html(self, url: str) -> tuple[bytes, str]:
        """Fetch a rendered page; returns (bytes, final URL after redirects)."""
        resp = self.request(url)
        return resp.content, resp.url

    def fetch_meta(self, endpoint: str) -> list[dict]:
        """Fetch and merge all pages of a meta endpoint."""
        merged: list[dict] = []
        page = 1
        while True:
            try:
                resp = self.request(
                    self.config.api(endpoint), {"per_page": 100, "page": page}
                )
            except FetchError as exc:
                if exc.kind == "http_4xx" and page > 1:
                    break
                raise
            batch = resp.json()
            if not isinstance(batch, list) or not batch:
                break
            merged.extend(batch)
            header = resp.headers.get("X-WP-TotalPages")
            if header and page >= int(header):
                break
            page += 1
        return merged


def list_posts(config: SiteConfig) -> list[RawPost]:
    """Convenience: fetch the full post listing."""
    return list(WpClient(config).iter_posts())


def fetch_page_html(url: str, config: SiteConfig) -> tuple[bytes, str]:
    """Convenience: fetch one rendered page."""
    return WpClient(config).fetch_page_html(url)


@dataclass
class SnapshotManifest:
    site_id: str
    base_url: str
    fetched_at: str
    complete: bool
    files: dict[str, dict]  # relative path -> {"sha256": ..., ...}
    failures: list[dict]  # {"url", "kind", "detail", "file"?}
    requests_made: int = 0
    retries: int = 0

    @property
    def post_count(self) -> int:
        return sum(1 for p in self.files if p.startswith("posts/"))

    @property
    def page_count(self) -> int:
        return sum(1 for p in self.files if p.startswith("pages/"))

    def to_dict(self) -> dict:
        return {
            "version": 1,
            "site_id": self.site_id,
            "base_url": self.base_url,
            "fetched_at": self.fetched_at,
            "complete": self.complete,
            "counts": {"posts": self.post_count, "pages": self.page_count},
            "stats": {"requests": self.requests_made, "retries": self.retries},
            "failures": self.failures,
            "files": self.files,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SnapshotManifest":
        return cls(
            site_id=data["site_id"],
            base_url=data.get("base_url", ""),
            fetched_at=data.get("fetched_at", ""),
            complete=bool(data.get("complete")),
            files=dict(data.get("files", {})),
            failures=list(data.get("failures", [])),
            requests_made=int(data.get("stats", {}).get("requests", 0)),
            retries=int(data.get("stats", {}).get("retries", 0)),
        )


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def load_manifest(path: Path) -> SnapshotManifest | None:
    """Load a manifest, returning None when absent or corrupt."""
    try:
        return SnapshotManifest.from_dict(json.loads(path.read_text(encoding="utf-8")))
    except (OSError, ValueError, KeyError):
        return None


def save_manifest(manifest: SnapshotManifest, path: Path) -> None:
    path.write_text(
        json.dumps(manifest.to_dict(), indent=2, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )


def verify_snapshot(site_dir: Path, manifest: SnapshotManifest) -> bool:
    """True when every manifest file exists with a matching checksum."""
    for rel, entry in manifest.files.items():
        target = site_dir / rel
        try:
            if _sha256(target.read_bytes()) != entry["sha256"]:
                return False
        except (OSError, KeyError):
            return False
    return True


def snapshot(config: SiteConfig, out_root: str | Path) -> SnapshotManifest:
    """Harvest a site into ``<out_root>/<site_id>/``; idempotent.

    A complete snapshot whose files verify is returned as-is with zero
    network requests. Otherwise the listing is (re)fetched; files that
    already verify against the previous manifest are reused, and
    permanently failed URLs (4xx) are not retried.
    """
    site_dir = Path(out_root) / config.site_id
    manifest_path = site_dir / "manifest.json"
    previous = load_manifest(manifest_path)
    if previous is not None and previous.complete and verify_snapshot(site_dir, previous):
        logger.info("snapshot of %s already complete; nothing to do", config.site_id)
        return previous

    old_files = previous.files if previous else {}
    permanent_failures = {
        f["url"]: f
        for f in (previous.failures if previous else [])
        if f.get("kind") in PERMANENT_KINDS
    }

    client = WpClient(config)
    files: dict[str, dict] = {}
    failures: list[dict] = []
    for sub in ("posts", "pages", "meta"):
        (site_dir / sub).mkdir(parents=True, exist_ok=True)

    posts: list[RawPost] = []
    for raw in client.iter_posts():
        rel = f"posts/{raw.id}.json"
        (site_dir / rel).write_bytes(raw.raw_json)
        files[rel] = {"sha256": _sha256(raw.raw_json)}
        posts.append(raw)

    def need_page(raw: RawPost) -> bool:
        if not raw.link:
            return False
        if raw.link in permanent_failures:
            failures.append(permanent_failures[raw.link])
            return False
        rel = f"pages/{raw.id}.html"
        entry = old_files.get(rel)
        if entry:
            target = site_dir / rel
            try:
                if _sha256(target.read_bytes()) == entry["sha256"]:
                    files[rel] = entry
                    return False
            except OSError:
                pass
        return True

    def fetch_one(raw: RawPost) -> None:
        rel = f"pages/{raw.id}.html"
        try:
            body, final_url = client.fetch_page_html(raw.link)
        except FetchError as exc:
            failures.append(
                {"url": exc.url, "kind": exc.kind, "detail": exc.detail, "file": rel}
            )
            return
        (site_dir / rel).write_bytes(body)
        entry: dict = {"sha256": _sha256(body), "original_url": raw.link}
        if final_url != raw.link:
            entry["final_url"] = final_url
        files[rel] = entry

    to_fetch = [raw for raw in posts if need_page(raw)]
    if to_fetch:
        with ThreadPoolExecutor(max_workers=config.concurrency) as pool:
            list(pool.map(fetch_one, to_fetch))

    for endpoint in ("users", "categories", "tags"):
        rel = f"meta/{endpoint}.json"
        try:
            merged = client.fetch_meta(endpoint)
        except FetchError as exc:
            failures.append(
                {"url": exc.url, "kind": exc.kind, "detail": exc.detail, "file": rel}
            )
            continue
        body = json.dumps(merged, ensure_ascii=False).encode("utf-8")
        (site_dir / rel).write_bytes(body)
        files[rel] = {"sha256": _sha256(body)}

    transient = [f for f in failures if f.get("kind") not in PERMANENT_KINDS]
    manifest = SnapshotManifest(
        site_id=config.site_id,
        base_url=config.base_url,
        fetched_at=datetime.now(timezone.utc).isoformat(timespec="seconds"),
        complete=not transient,
        files=files,
        failures=failures,
        requests_made=client.request_count,
        retries=client.retry_count,
    )
    save_manifest(manifest, manifest_path)
    if failures:
        logger.warning(
            "snapshot of %s finished with %d failure(s)", config.site_id, len(failures)
        )
    return manifest
