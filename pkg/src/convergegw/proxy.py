"""Same-origin content gateway.

Fetches module resources on behalf of the browser and rewrites HTML so that
every link and asset reference points back at this gateway, letting module
browsing stay inside the module without a page reload. Rewriting is
attribute-level string surgery, deliberately tolerant of broken markup.
"""

from __future__ import annotations

import ipaddress
import re
import socket
from dataclasses import dataclass
from urllib.parse import quote, urljoin, urlsplit

import requests

from .errors import (
    BlockedTarget,
    UnsupportedScheme,
    UpstreamTimeout,
    UpstreamUnreachable,
)

PROXY_PATH = "/proxy.php"
NAV_MARKER = 'data-module-nav="1"'
SKIP_SCHEMES = ("javascript:", "mailto:", "data:", "tel:")
MAX_REDIRECT_HOPS = 5

_TAG_RE = re.compile(r"<([a-zA-Z][a-zA-Z0-9:_-]*)((?:\s[^<>]*)?)(/?)>", re.S)
_ATTR_RE = re.compile(
    r"""(\b(?:href|src|action)\s*=\s*)("([^"]*)"|'([^']*)'|([^\s>'"]+))""",
    re.I | re.S,
)
_HTML_TYPES = ("text/html", "application/xhtml+xml")


def _scheme(url: str) -> str:
    return url.split(":", 1)[0].lower() if ":" in url else ""


def proxy_prefix(gateway_base: str) -> str:
    return gateway_base.rstrip("/") + PROXY_PATH + "?url="


def rewrite_url(gateway_base: str, target_url: str) -> str:
    """Map an absolute http(s) URL onto this gateway's proxy endpoint.

    Already-proxied URLs pass through unchanged, so the transform is
    idempotent. The target is percent-encoded in full to survive query
    strings containing '&'.
    """
    prefix = proxy_prefix(gateway_base)
    if target_url.startswith(prefix):
        return target_url
    scheme = _scheme(target_url)
    if scheme not in ("http", "https"):
        raise UnsupportedScheme(f"cannot proxy scheme: {scheme or '(none)'}")
    return prefix + quote(target_url, safe="")


@dataclass
class RewriteResult:
    body: bytes
    content_type: str
    rewritten_link_count: int
    upstream_status: int
    location: str | None = None  # rewritten redirect target, when upstream ends on a 3xx


def _eligible(value: str) -> bool:
    """URL attribute values the rewriter touches: everything except
    fragments, pseudo-schemes, and values we cannot proxy."""
    v = value.strip()
    if not v or v.startswith("#"):
        return False
    lv = v.lower()
    if any(lv.startswith(s) for s in SKIP_SCHEMES):
        return False
    sch = _scheme(v)
    if sch and sch not in ("http", "https") and not v.startswith("//"):
        return False
    return True


def rewrite_html(body: bytes, document_base: str, gateway_base: str) -> RewriteResult:
    """Rewrite href/src/action attributes to gateway proxy URLs.

    Relative URLs resolve against document_base first. Anchors whose href
    was rewritten gain a data-module-nav marker so the client turns clicks
    into in-module partial requests. Best-effort on malformed HTML.
    """
    text = body.decode("utf-8", errors="replace")
    prefix = proxy_prefix(gateway_base)
    count = 0

    def fix_tag(m: re.Match) -> str:
        nonlocal count
        tag_name = m.group(1).lower()
        attrs = m.group(2)
        selfclose = m.group(3)
        anchor_rewritten = False

        def fix_attr(am: re.Match) -> str:
            nonlocal count, anchor_rewritten
            lead = am.group(1)
            raw = am.group(2)
            if raw.startswith('"'):
                value, q = am.group(3), '"'
            elif raw.startswith("'"):
                value, q = am.group(4), "'"
            else:
                value, q = am.group(5), '"'
            if value.startswith(prefix) or not _eligible(value):
                return am.group(0)
            resolved = urljoin(document_base, value.strip())
            if _scheme(resolved) not in ("http", "https"):
                return am.group(0)
            count += 1
            if tag_name == "a":
                anchor_rewritten = True
            return f"{lead}{q}{rewrite_url(gateway_base, resolved)}{q}"

        new_attrs = _ATTR_RE.sub(fix_attr, attrs)
        if anchor_rewritten and NAV_MARKER not in new_attrs:
            new_attrs = new_attrs.rstrip() + " " + NAV_MARKER
        return f"<{m.group(1)}{new_attrs}{selfclose}>"

    rewritten = _TAG_RE.sub(fix_tag, text)
    return RewriteResult(
        body=rewritten.encode("utf-8"),
        content_type="text/html",
        rewritten_link_count=count,
        upstream_status=200,
    )


class SsrfPolicy:
    """Blocks fetches that would reach loopback, link-local, or private
    address space unless explicitly allowed (tests run local fixtures)."""

    def __init__(self, allow_private_addresses: bool = False):
        self.allow_private_addresses = allow_private_addresses

    def check(self, url: str):
        scheme = _scheme(url)
        if scheme not in ("http", "https"):
            raise UnsupportedScheme(f"cannot proxy scheme: {scheme or '(none)'}")
        if self.allow_private_addresses:
            return
        host = urlsplit(url).hostname
        if not host:
            raise BlockedTarget("missing host")
        try:
            infos = socket.getaddrinfo(host, None)
        except socket.gaierror:
            raise UpstreamUnreachable(f"cannot resolve host: {host}")
        for info in infos:
            ip = ipaddress.ip_address(info[4][0])
            if ip.is_loopback or ip.is_link_local or ip.is_private or ip.is_reserved:
                raise BlockedTarget(f"target resolves to blocked address: {ip}")


class ProxyFetcher:
    """SSRF-guarded upstream fetcher with manual redirect handling."""

    def __init__(self, policy: SsrfPolicy, timeout_ms: int = 5000,
                 max_body_bytes: int = 5 * 1024 * 1024):
        self.policy = policy
        self.timeout_ms = timeout_ms
        self.max_body_bytes = max_body_bytes

    def fetch_raw(self, url: str) -> tuple[int, str, bytes, str | None]:
        """Returns (status, content_type, body, final redirect location)."""
        self.policy.check(url)
        timeout = self.timeout_ms / 1000.0
        headers = {"Via": "converge-gw"}
        current = url
        resp = None
        for _ in range(MAX_REDIRECT_HOPS + 1):
            try:
                resp = requests.get(current, headers=headers, timeout=timeout,
                                    allow_redirects=False, stream=True)
            except requests.Timeout:
                raise UpstreamTimeout(f"upstream timed out: {current}")
            except requests.RequestException as e:
                raise UpstreamUnreachable(f"upstream unreachable: {current}: {e}")
            if not resp.is_redirect or "Location" not in resp.headers:
                break
            current = urljoin(current, resp.headers["Location"])
            self.policy.check(current)
        location = resp.headers.get("Location")
        body = b""
        for chunk in resp.iter_content(65536):
            body += chunk
            if len(body) > self.max_body_bytes:
                resp.close()
                return 502, "text/plain", b"upstream body exceeds size limit", None
        ctype = resp.headers.get("Content-Type", "application/octet-stream")
        return resp.status_code, ctype, body, location


def fetch_proxied(fetcher: ProxyFetcher, target_url: str, gateway_base: str) -> RewriteResult:
    """Fetch a module resource; rewrite HTML bodies, pass others through."""
    status, ctype, body, location = fetcher.fetch_raw(target_url)
    if location is not None:
        location = urljoin(target_url, location)
        if _scheme(location) in ("http", "https"):
            location = rewrite_url(gateway_base, location)
    base_type = ctype.split(";", 1)[0].strip().lower()
    if base_type in _HTML_TYPES:
        result = rewrite_html(body, target_url, gateway_base)
        result.content_type = ctype
        result.upstream_status = status
        result.location = location
        return result
    return RewriteResult(body=body, content_type=ctype, rewritten_link_count=0,
                         upstream_status=status, location=location)
