"""Gateway configuration: flat key=value file plus CLI flag overrides.

Flags win over file values; both win over defaults.
"""

from __future__ import annotations

import argparse
import os
from dataclasses import dataclass, fields

from .errors import BadConfig


@dataclass
class GatewayConfig:
    port: int = 8710
    data_dir: str = "./data"
    fetch_timeout_ms: int = 5000
    session_ttl_hours: int = 24
    allow_private_addresses: bool = False
    widget_seed_path: str = ""
    max_proxy_body_bytes: int = 5 * 1024 * 1024
    admin_token: str = "admin"
    ui_dir: str = ""
    coordinate_calls: bool = False

    def validate(self):
        for name in ("port", "fetch_timeout_ms", "session_ttl_hours",
                     "max_proxy_body_bytes"):
            if getattr(self, name) <= 0:
                raise BadConfig(f"{name} must be positive")
        parent = os.path.dirname(os.path.abspath(self.data_dir)) or "."
        if not os.path.isdir(self.data_dir):
            if not os.access(parent, os.W_OK):
                raise BadConfig(f"cannot create data_dir under {parent}")
            os.makedirs(self.data_dir, exist_ok=True)
        if not os.access(self.data_dir, os.W_OK):
            raise BadConfig(f"data_dir not writable: {self.data_dir}")


_BOOL_FIELDS = {"allow_private_addresses", "coordinate_calls"}
_INT_FIELDS = {"port", "fetch_timeout_ms", "session_ttl_hours", "max_proxy_body_bytes"}


def load_config_file(path: str) -> dict:
    values = {}
    known = {f.name for f in fields(GatewayConfig)}
    with open(path) as f:
        for lineno, line in enumerate(f, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise BadConfig(f"{path}:{lineno}: expected key=value")
            key, _, value = line.partition("=")
            key, value = key.strip(), value.strip()
            if key not in known:
                raise BadConfig(f"{path}:{lineno}: unknown key {key}")
            if key in _BOOL_FIELDS:
                values[key] = value.lower() in ("1", "true", "yes", "on")
            elif key in _INT_FIELDS:
                try:
                    values[key] = int(value)
                except ValueError:
                    raise BadConfig(f"{path}:{lineno}: {key} must be an integer")
            else:
                values[key] = value
    return values


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="converge-gw",
                                description="Converged dashboard gateway")
    p.add_argument("--config", help="path to key=value config file")
    p.add_argument("--port", type=int)
    p.add_argument("--data-dir", dest="data_dir")
    p.add_argument("--fetch-timeout-ms", dest="fetch_timeout_ms", type=int)
    p.add_argument("--session-ttl-hours", dest="session_ttl_hours", type=int)
    p.add_argument("--allow-private-addresses", dest="allow_private_addresses",
                   action="store_true", default=None)
    p.add_argument("--seed", dest="widget_seed_path",
                   help="widget catalog seed file (JSON array of descriptors)")
    p.add_argument("--max-proxy-body-bytes", dest="max_proxy_body_bytes", type=int)
    p.add_argument("--admin-token", dest="admin_token")
    p.add_argument("--ui-dir", dest="ui_dir",
                   help="built dashboard bundle to serve at /")
    p.add_argument("--coordinate-calls", dest="coordinate_calls",
                   action="store_true", default=None)
    return p


def config_from_args(argv=None) -> GatewayConfig:
    args = build_parser().parse_args(argv)
    values = {}
    if args.config:
        values.update(load_config_file(args.config))
    for f in fields(GatewayConfig):
        v = getattr(args, f.name, None)
        if v is not None:
            values[f.name] = v
    cfg = GatewayConfig(**values)
    cfg.validate()
    return cfg
