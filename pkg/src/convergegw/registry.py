"""Widget catalog, usage counters, and the unload-event hook.

The widget "API" is modeled server-side: a descriptor describes what a
widget is and whether it declares an unload handler; removal of an instance
of a handler-declaring widget records exactly one unload event.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field

from .clock import clock
from .errors import (
    InvalidDescriptor,
    NoHandlerDeclared,
    SeedFileInvalid,
    UnknownInstance,
    UnknownWidget,
)

WIDGET_KINDS = {"feed", "proxied_page", "telecom_enabler", "static"}
ENABLERS = {"presence", "messaging", "call", "profile"}


@dataclass
class WidgetDescriptor:
    widget_id: str
    name: str
    kind: str
    source_url: str | None = None
    enabler: str | None = None
    default_config: dict = field(default_factory=dict)
    declares_unload_handler: bool = False

    def validate(self):
        if self.kind not in WIDGET_KINDS:
            raise InvalidDescriptor(f"unknown widget kind: {self.kind}")
        if self.kind in ("feed", "proxied_page"):
            if not self.source_url:
                raise InvalidDescriptor(f"{self.kind} widget requires source_url")
            scheme = self.source_url.split(":", 1)[0].lower()
            if scheme not in ("http", "https"):
                raise InvalidDescriptor(f"bad source_url scheme: {scheme}")
        else:
            if self.source_url:
                raise InvalidDescriptor(f"{self.kind} widget must not carry source_url")
        if self.kind == "telecom_enabler":
            if self.enabler not in ENABLERS:
                raise InvalidDescriptor("telecom_enabler widget requires a valid enabler")
        elif self.enabler:
            raise InvalidDescriptor("enabler only valid on telecom_enabler widgets")

    def to_dict(self) -> dict:
        return {
            "widget_id": self.widget_id,
            "name": self.name,
            "kind": self.kind,
            "source_url": self.source_url,
            "enabler": self.enabler,
            "default_config": dict(self.default_config),
            "declares_unload_handler": self.declares_unload_handler,
        }


@dataclass
class UsageCounter:
    widget_id: str
    add_count: int = 0
    active_instances: int = 0


class WidgetRegistry:
    """Catalog plus per-widget usage accounting and unload-event log."""

    def __init__(self):
        self._lock = threading.RLock()
        self._catalog: dict[str, WidgetDescriptor] = {}
        self._counters: dict[str, UsageCounter] = {}
        self._instances: dict[str, str] = {}  # instance_id -> widget_id
        self._unload_events: list[dict] = []

    def register_widget(self, descriptor: WidgetDescriptor) -> str:
        descriptor.validate()
        with self._lock:
            existing = self._catalog.get(descriptor.widget_id)
            if existing is not None and existing.to_dict() != descriptor.to_dict():
                raise InvalidDescriptor(
                    f"widget_id already registered with different descriptor: {descriptor.widget_id}"
                )
            self._catalog[descriptor.widget_id] = descriptor
            self._counters.setdefault(descriptor.widget_id, UsageCounter(descriptor.widget_id))
            return descriptor.widget_id

    def list_widgets(self) -> list[WidgetDescriptor]:
        with self._lock:
            return [self._catalog[k] for k in sorted(self._catalog)]

    def get_widget(self, widget_id: str) -> WidgetDescriptor:
        with self._lock:
            desc = self._catalog.get(widget_id)
        if desc is None:
            raise UnknownWidget(f"no such widget: {widget_id}")
        return desc

    # ---- usage accounting (driven by prefs) ----

    def instance_added(self, widget_id: str, instance_id: str):
        with self._lock:
            self.get_widget(widget_id)
            c = self._counters[widget_id]
            c.add_count += 1
            c.active_instances += 1
            self._instances[instance_id] = widget_id

    def instance_removed(self, instance_id: str):
        with self._lock:
            widget_id = self._instances.pop(instance_id, None)
            if widget_id is None:
                raise UnknownInstance(f"no such instance: {instance_id}")
            self._counters[widget_id].active_instances -= 1
            return widget_id

    def notify_unload(self, widget_id: str, instance_id: str):
        with self._lock:
            if self._instances.get(instance_id) != widget_id:
                raise UnknownInstance(f"no such instance: {instance_id}")
            if not self.get_widget(widget_id).declares_unload_handler:
                raise NoHandlerDeclared(f"widget declares no unload handler: {widget_id}")
            self._unload_events.append(
                {"widget_id": widget_id, "instance_id": instance_id, "at": clock.now()}
            )

    def unload_events(self) -> list[dict]:
        with self._lock:
            return list(self._unload_events)

    def usage_counters(self) -> list[UsageCounter]:
        with self._lock:
            return [
                UsageCounter(c.widget_id, c.add_count, c.active_instances)
                for _, c in sorted(self._counters.items())
            ]

    # ---- seeding ----

    def seed_from_file(self, path: str):
        try:
            with open(path) as f:
                entries = json.load(f)
            if not isinstance(entries, list):
                raise ValueError("seed file must hold a JSON array")
            for entry in entries:
                self.register_widget(WidgetDescriptor(**entry))
        except InvalidDescriptor as e:
            raise SeedFileInvalid(f"bad descriptor in seed file: {e.message}")
        except (OSError, ValueError, TypeError) as e:
            raise SeedFileInvalid(f"unreadable seed file {path}: {e}")

    def seed_builtin(self):
        """Default desk-scale catalog used when no seed file is configured."""
        for entry in BUILTIN_CATALOG:
            self.register_widget(WidgetDescriptor(**entry))


BUILTIN_CATALOG = [
    {
        "widget_id": "profile",
        "name": "My Profile",
        "kind": "telecom_enabler",
        "enabler": "profile",
    },
    {
        "widget_id": "speed-dial",
        "name": "Speed Dial",
        "kind": "telecom_enabler",
        "enabler": "call",
    },
    {
        "widget_id": "presence-im",
        "name": "Presence & Messages",
        "kind": "telecom_enabler",
        "enabler": "messaging",
    },
    {
        "widget_id": "news-feed",
        "name": "News Feed",
        "kind": "feed",
        "source_url": "http://fixtures.local/news.rss",
        "default_config": {"refresh_seconds": "300", "limit": "10"},
    },
    {
        "widget_id": "web-page",
        "name": "Web Page",
        "kind": "proxied_page",
        "source_url": "http://fixtures.local/page.html",
        "declares_unload_handler": True,
    },
]
