"""RSS 2.0 / Atom 1.0 fetching, parsing, caching, and merging.

Parsers are defensive: arbitrary bytes raise MalformedXml (or a dialect
error), never crash. Titles and summaries keep their entities verbatim;
sanitization is the UI's job.
"""

from __future__ import annotations

import threading
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from datetime import datetime, timezone
from email.utils import parsedate_to_datetime

from .clock import clock
from .errors import MalformedXml, NotAtom, NotRss, UnrecognizedFeedRoot

ATOM_NS = "{http://www.w3.org/2005/Atom}"
DEFAULT_TTL_SECONDS = 300


@dataclass
class FeedItem:
    title: str
    link: str | None
    published: float | None  # epoch seconds UTC
    summary: str
    source_url: str
    source_index: int

    def to_dict(self) -> dict:
        return {
            "title": self.title,
            "link": self.link,
            "published": self.published,
            "summary": self.summary,
            "source_url": self.source_url,
            "source_index": self.source_index,
        }


@dataclass
class FeedDocument:
    source_url: str
    title: str
    items: list
    fetched_at: float
    ttl_seconds: int = DEFAULT_TTL_SECONDS

    def to_dict(self) -> dict:
        return {
            "source_url": self.source_url,
            "title": self.title,
            "items": [it.to_dict() for it in self.items],
            "fetched_at": self.fetched_at,
            "ttl_seconds": self.ttl_seconds,
        }


def _parse_xml(xml: bytes) -> ET.Element:
    try:
        return ET.fromstring(xml)
    except (ET.ParseError, ValueError) as e:
        raise MalformedXml(f"not well-formed XML: {e}")


def _localname(tag) -> str:
    if not isinstance(tag, str):
        return ""
    return tag.rsplit("}", 1)[-1].lower()


def _text(elem) -> str:
    return (elem.text or "") if elem is not None else ""


def _parse_rfc822(value: str) -> float | None:
    try:
        dt = parsedate_to_datetime(value)
    except (TypeError, ValueError):
        return None
    if dt is None:
        return None
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.timestamp()


def _parse_rfc3339(value: str) -> float | None:
    v = value.strip()
    if v.endswith(("Z", "z")):
        v = v[:-1] + "+00:00"
    try:
        dt = datetime.fromisoformat(v)
    except ValueError:
        return None
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.timestamp()


def parse_rss(xml: bytes, source_url: str) -> FeedDocument:
    root = _parse_xml(xml)
    if _localname(root.tag) != "rss":
        raise NotRss(f"root element is <{_localname(root.tag)}>, expected <rss>")
    channel = root.find("channel")
    title = _text(channel.find("title")) if channel is not None else ""
    items = []
    if channel is not None:
        for idx, node in enumerate(channel.findall("item")):
            link = _text(node.find("link")).strip() or None
            pub = _text(node.find("pubDate")).strip()
            items.append(FeedItem(
                title=_text(node.find("title")),
                link=link,
                published=_parse_rfc822(pub) if pub else None,
                summary=_text(node.find("description")),
                source_url=source_url,
                source_index=idx,
            ))
    return FeedDocument(source_url=source_url, title=title, items=items,
                        fetched_at=clock.now())


def _atom_find(parent, name):
    node = parent.find(ATOM_NS + name)
    if node is None:
        node = parent.find(name)
    return node


def _atom_findall(parent, name):
    return parent.findall(ATOM_NS + name) or parent.findall(name)


def _atom_link(entry) -> str | None:
    links = _atom_findall(entry, "link")
    if not links:
        return None
    for node in links:
        if node.get("rel") == "alternate":
            return node.get("href")
    return links[0].get("href")


def parse_atom(xml: bytes, source_url: str) -> FeedDocument:
    root = _parse_xml(xml)
    if _localname(root.tag) != "feed":
        raise NotAtom(f"root element is <{_localname(root.tag)}>, expected <feed>")
    items = []
    for idx, entry in enumerate(_atom_findall(root, "entry")):
        upd = _text(_atom_find(entry, "updated")).strip()
        items.append(FeedItem(
            title=_text(_atom_find(entry, "title")),
            link=_atom_link(entry),
            published=_parse_rfc3339(upd) if upd else None,
            summary=_text(_atom_find(entry, "summary")),
            source_url=source_url,
            source_index=idx,
        ))
    return FeedDocument(source_url=source_url,
                        title=_text(_atom_find(root, "title")),
                        items=items, fetched_at=clock.now())


def parse_feed(xml: bytes, source_url: str) -> FeedDocument:
    """Dispatch on root element: <rss> or <feed>."""
    root = _parse_xml(xml)
    name = _localname(root.tag)
    if name == "rss":
        return parse_rss(xml, source_url)
    if name == "feed":
        return parse_atom(xml, source_url)
    raise UnrecognizedFeedRoot(f"root element <{name}> is neither RSS nor Atom")


def merge_items(docs: list, limit: int) -> list:
    """All items across docs, newest first; undated items after all dated
    ones; ties broken by (source_url, source_index)."""
    items = [it for doc in docs for it in doc.items]
    items.sort(key=lambda it: (
        it.published is None,
        -(it.published if it.published is not None else 0.0),
        it.source_url,
        it.source_index,
    ))
    return items[:limit]


@dataclass
class FeedService:
    """TTL cache in front of the proxy's fetch path, single-flight per URL."""

    fetch_raw: object  # callable(url) -> (status, content_type, body, location)
    default_ttl: int = DEFAULT_TTL_SECONDS

    _cache: dict = field(default_factory=dict)  # url -> FeedDocument
    _locks: dict = field(default_factory=dict)  # url -> Lock
    _guard: threading.Lock = field(default_factory=threading.Lock)

    def _url_lock(self, url: str) -> threading.Lock:
        with self._guard:
            return self._locks.setdefault(url, threading.Lock())

    def fetch_feed(self, url: str, ttl_seconds: int | None = None) -> FeedDocument:
        ttl = ttl_seconds if ttl_seconds is not None else self.default_ttl
        with self._url_lock(url):
            doc = self._cache.get(url)
            if doc is not None and clock.now() - doc.fetched_at < ttl:
                return doc
            _status, _ctype, body, _loc = self.fetch_raw(url)
            doc = parse_feed(body, url)
            doc.ttl_seconds = ttl
            self._cache[url] = doc
            return doc
