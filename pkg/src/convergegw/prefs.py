"""Per-user dashboard personalization: tabs, placed widget instances, and
durable persistence.

Every user's layout lives in one JSON document under
<data_dir>/users/<user_id>.json, written atomically on every successful
mutation; the disconnect-save is then just a final flush.
"""

from __future__ import annotations

import json
import os
import secrets
import threading
from dataclasses import dataclass, field

from .clock import clock
from .errors import (
    CellOccupied,
    LastTab,
    StorageFailure,
    TabNotEmpty,
    UnknownInstance,
    UnknownTab,
)


@dataclass
class Tab:
    tab_id: str
    owner: str
    title: str
    order: int

    def to_dict(self) -> dict:
        return {"tab_id": self.tab_id, "owner": self.owner,
                "title": self.title, "order": self.order}


@dataclass
class WidgetInstance:
    instance_id: str
    owner: str
    widget_id: str
    tab_id: str
    col: int
    row: int
    config: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"instance_id": self.instance_id, "owner": self.owner,
                "widget_id": self.widget_id, "tab_id": self.tab_id,
                "col": self.col, "row": self.row, "config": dict(self.config)}


@dataclass
class DashboardLayout:
    owner: str
    tabs: list
    instances: list
    version: int = 0

    def to_dict(self) -> dict:
        return {
            "owner": self.owner,
            "tabs": [t.to_dict() for t in sorted(self.tabs, key=lambda t: t.order)],
            "instances": [i.to_dict() for i in sorted(self.instances,
                                                      key=lambda i: i.instance_id)],
            "version": self.version,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "DashboardLayout":
        return cls(
            owner=raw["owner"],
            tabs=[Tab(**t) for t in raw["tabs"]],
            instances=[WidgetInstance(**i) for i in raw["instances"]],
            version=raw["version"],
        )


class PrefsService:
    """Layout mutations, serialized per user, autosaved on every change."""

    DEFAULT_TAB_TITLE = "Home"
    DEFAULT_WIDGET = "profile"

    def __init__(self, data_dir: str, registry):
        self.data_dir = data_dir
        self.registry = registry
        self._layouts: dict[str, DashboardLayout] = {}
        self._locks: dict[str, threading.RLock] = {}
        self._guard = threading.Lock()
        os.makedirs(self._users_dir, exist_ok=True)

    @property
    def _users_dir(self) -> str:
        return os.path.join(self.data_dir, "users")

    def _path(self, user_id: str) -> str:
        return os.path.join(self._users_dir, f"{user_id}.json")

    def _user_lock(self, user_id: str) -> threading.RLock:
        with self._guard:
            return self._locks.setdefault(user_id, threading.RLock())

    # ---- persistence ----

    def _persist(self, layout: DashboardLayout):
        try:
            tmp = self._path(layout.owner) + ".tmp"
            with open(tmp, "w") as f:
                json.dump(layout.to_dict(), f)
            os.replace(tmp, self._path(layout.owner))
        except OSError as e:
            raise StorageFailure(f"cannot persist layout: {e}")

    def save_on_disconnect(self, user_id: str):
        with self._user_lock(user_id):
            layout = self._layouts.get(user_id)
            if layout is not None:
                self._persist(layout)

    def load_on_connect(self, user_id: str) -> DashboardLayout:
        with self._user_lock(user_id):
            return self._layout(user_id)

    def _layout(self, user_id: str) -> DashboardLayout:
        """In-memory layout, loading the durable copy or seeding a default."""
        layout = self._layouts.get(user_id)
        if layout is not None:
            return layout
        try:
            with open(self._path(user_id)) as f:
                layout = DashboardLayout.from_dict(json.load(f))
            for inst in layout.instances:
                self.registry.instance_added(inst.widget_id, inst.instance_id)
        except FileNotFoundError:
            layout = self._seed_default(user_id)
            self._persist(layout)
        except (json.JSONDecodeError, KeyError, TypeError) as e:
            raise StorageFailure(f"corrupt layout file for {user_id}: {e}")
        self._layouts[user_id] = layout
        return layout

    def _seed_default(self, user_id: str) -> DashboardLayout:
        tab = Tab(secrets.token_hex(6), user_id, self.DEFAULT_TAB_TITLE, 0)
        inst = WidgetInstance(secrets.token_hex(6), user_id,
                              self.DEFAULT_WIDGET, tab.tab_id, 0, 0)
        self.registry.instance_added(inst.widget_id, inst.instance_id)
        return DashboardLayout(owner=user_id, tabs=[tab], instances=[inst])

    # ---- reads ----

    def get_dashboard(self, user_id: str) -> DashboardLayout:
        with self._user_lock(user_id):
            return self._layout(user_id)

    # ---- widget instance mutations ----

    def _find_tab(self, layout: DashboardLayout, tab_id: str) -> Tab:
        for t in layout.tabs:
            if t.tab_id == tab_id:
                return t
        raise UnknownTab(f"no such tab: {tab_id}")

    def _find_instance(self, layout: DashboardLayout, instance_id: str) -> WidgetInstance:
        for i in layout.instances:
            if i.instance_id == instance_id:
                return i
        raise UnknownInstance(f"no such instance: {instance_id}")

    def _cell_occupied(self, layout, tab_id, col, row, ignore=None) -> bool:
        return any(i.tab_id == tab_id and i.col == col and i.row == row
                   and i.instance_id != ignore
                   for i in layout.instances)

    def add_widget(self, user_id: str, tab_id: str, widget_id: str,
                   col: int, row: int, config: dict | None = None) -> WidgetInstance:
        with self._user_lock(user_id):
            layout = self._layout(user_id)
            self.registry.get_widget(widget_id)  # UnknownWidget if absent
            self._find_tab(layout, tab_id)
            if self._cell_occupied(layout, tab_id, col, row):
                raise CellOccupied(f"cell ({tab_id},{col},{row}) already occupied")
            inst = WidgetInstance(secrets.token_hex(6), user_id, widget_id,
                                  tab_id, col, row, dict(config or {}))
            layout.instances.append(inst)
            self.registry.instance_added(widget_id, inst.instance_id)
            layout.version += 1
            self._persist(layout)
            return inst

    def move_widget(self, user_id: str, instance_id: str, new_tab_id: str,
                    new_col: int, new_row: int) -> WidgetInstance:
        with self._user_lock(user_id):
            layout = self._layout(user_id)
            inst = self._find_instance(layout, instance_id)
            self._find_tab(layout, new_tab_id)
            if self._cell_occupied(layout, new_tab_id, new_col, new_row,
                                   ignore=instance_id):
                raise CellOccupied(f"cell ({new_tab_id},{new_col},{new_row}) already occupied")
            inst.tab_id, inst.col, inst.row = new_tab_id, new_col, new_row
            layout.version += 1
            self._persist(layout)
            return inst

    def _remove_instance(self, layout: DashboardLayout, inst: WidgetInstance):
        layout.instances.remove(inst)
        desc = self.registry.get_widget(inst.widget_id)
        if desc.declares_unload_handler:
            self.registry.notify_unload(inst.widget_id, inst.instance_id)
        self.registry.instance_removed(inst.instance_id)

    def remove_widget(self, user_id: str, instance_id: str):
        with self._user_lock(user_id):
            layout = self._layout(user_id)
            inst = self._find_instance(layout, instance_id)
            self._remove_instance(layout, inst)
            layout.version += 1
            self._persist(layout)

    def set_widget_config(self, user_id: str, instance_id: str,
                          config: dict) -> WidgetInstance:
        with self._user_lock(user_id):
            layout = self._layout(user_id)
            inst = self._find_instance(layout, instance_id)
            inst.config = dict(config)
            layout.version += 1
            self._persist(layout)
            return inst

    # ---- tab mutations ----

    def _renormalize(self, layout: DashboardLayout):
        for order, tab in enumerate(sorted(layout.tabs, key=lambda t: t.order)):
            tab.order = order

    def create_tab(self, user_id: str, title: str) -> Tab:
        with self._user_lock(user_id):
            layout = self._layout(user_id)
            tab = Tab(secrets.token_hex(6), user_id, title, len(layout.tabs))
            layout.tabs.append(tab)
            self._renormalize(layout)
            layout.version += 1
            self._persist(layout)
            return tab

    def rename_tab(self, user_id: str, tab_id: str, title: str) -> Tab:
        with self._user_lock(user_id):
            layout = self._layout(user_id)
            tab = self._find_tab(layout, tab_id)
            tab.title = title
            layout.version += 1
            self._persist(layout)
            return tab

    def delete_tab(self, user_id: str, tab_id: str, cascade: bool = False):
        with self._user_lock(user_id):
            layout = self._layout(user_id)
            tab = self._find_tab(layout, tab_id)
            if len(layout.tabs) == 1:
                raise LastTab("cannot delete the last remaining tab")
            contained = [i for i in layout.instances if i.tab_id == tab_id]
            if contained and not cascade:
                raise TabNotEmpty(f"tab holds {len(contained)} widgets")
            for inst in contained:
                self._remove_instance(layout, inst)
            layout.tabs.remove(tab)
            self._renormalize(layout)
            layout.version += 1
            self._persist(layout)

    def reorder_tabs(self, user_id: str, tab_ids: list) -> list:
        with self._user_lock(user_id):
            layout = self._layout(user_id)
            if sorted(tab_ids) != sorted(t.tab_id for t in layout.tabs):
                raise UnknownTab("reorder list must name every tab exactly once")
            by_id = {t.tab_id: t for t in layout.tabs}
            for order, tid in enumerate(tab_ids):
                by_id[tid].order = order
            layout.version += 1
            self._persist(layout)
            return sorted(layout.tabs, key=lambda t: t.order)
