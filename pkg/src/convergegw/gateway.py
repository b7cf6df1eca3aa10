"""Assembles every service family behind one configuration.

The Gateway owns the module instances and the wiring between them: login
loads preferences, logout saves them, widget removal feeds usage counters
and unload events, feed fetches ride the proxy's SSRF-guarded fetch path,
and coordinated calls create activity contexts.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

from .auth import AuthService
from .clock import clock
from .config import GatewayConfig
from .coordination import Coordinator
from .feeds import FeedService
from .prefs import PrefsService
from .proxy import ProxyFetcher, SsrfPolicy
from .registry import WidgetRegistry
from .telecom import TelecomService


@dataclass
class UsageReport:
    counters: list
    total_users: int
    active_sessions: int
    generated_at: float

    def to_dict(self) -> dict:
        return {
            "counters": [vars(c) for c in self.counters],
            "total_users": self.total_users,
            "active_sessions": self.active_sessions,
            "generated_at": self.generated_at,
        }


class Gateway:
    def __init__(self, config: GatewayConfig):
        config.validate()
        self.config = config

        self.registry = WidgetRegistry()
        if config.widget_seed_path:
            self.registry.seed_from_file(config.widget_seed_path)
        else:
            self.registry.seed_builtin()

        self.prefs = PrefsService(config.data_dir, self.registry)
        self.auth = AuthService(
            data_dir=config.data_dir,
            session_ttl_hours=config.session_ttl_hours,
            on_connect=self.prefs.load_on_connect,
            on_disconnect=self.prefs.save_on_disconnect,
        )
        self.fetcher = ProxyFetcher(
            SsrfPolicy(config.allow_private_addresses),
            timeout_ms=config.fetch_timeout_ms,
            max_body_bytes=config.max_proxy_body_bytes,
        )
        self.feeds = FeedService(fetch_raw=self.fetcher.fetch_raw)
        self.coordinator = Coordinator()
        self.telecom = TelecomService(
            user_exists=self.auth.user_exists,
            username_of=self.auth.username_of,
            coordinator=self.coordinator,
            coordinate_calls=config.coordinate_calls,
            dashboard_services=self._dashboard_services,
        )

    def _dashboard_services(self, user_id: str) -> list:
        """Service ids for the widgets on a user's dashboard, used as
        coordination propagation targets for coordinated calls."""
        layout = self.prefs.get_dashboard(user_id)
        services = []
        for inst in layout.instances:
            desc = self.registry.get_widget(inst.widget_id)
            if desc.kind in ("feed", "proxied_page"):
                services.append(f"{desc.kind}:{desc.widget_id}")
        return sorted(set(services))

    def feed_subscriptions(self, user_id: str) -> list:
        """(source_url, ttl) for every feed widget on the user's dashboard."""
        layout = self.prefs.get_dashboard(user_id)
        subs = []
        for inst in layout.instances:
            desc = self.registry.get_widget(inst.widget_id)
            if desc.kind != "feed":
                continue
            cfg = {**desc.default_config, **inst.config}
            url = cfg.get("source_url", desc.source_url)
            try:
                ttl = int(cfg.get("refresh_seconds", ""))
            except ValueError:
                ttl = None
            subs.append((url, ttl))
        return subs

    def usage_report(self) -> UsageReport:
        return UsageReport(
            counters=self.registry.usage_counters(),
            total_users=len(self.auth.all_user_ids()),
            active_sessions=self.auth.active_session_count(),
            generated_at=clock.now(),
        )

    def healthcheck(self) -> dict:
        probe = os.path.join(self.config.data_dir, ".health-probe")
        try:
            with open(probe, "w") as f:
                f.write("ok")
            os.remove(probe)
            storage_ok = True
        except OSError:
            storage_ok = False
        return {
            "status": "ok" if storage_ok else "degraded",
            "storage_writable": storage_ok,
            "modules": {
                "auth": True, "widgets": True, "proxy": True, "feeds": True,
                "telecom": True, "coordination": True, "prefs": True,
            },
        }

    def shutdown(self):
        """Disconnect-save for every live session before the process exits."""
        for user_id in self.auth.live_user_ids():
            self.prefs.save_on_disconnect(user_id)
