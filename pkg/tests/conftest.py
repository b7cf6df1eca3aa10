import json
import os
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest
from fastapi.testclient import TestClient

from convergegw.app import create_app
from convergegw.config import GatewayConfig
from convergegw.gateway import Gateway

FIXTURES = os.path.join(os.path.dirname(os.path.abspath(__file__)), "fixtures")

# binary payload for passthrough checks (PNG magic + arbitrary bytes)
PNG_BYTES = b"\x89PNG\r\n\x1a\n" + bytes(range(256)) * 8


class FixtureHandler(BaseHTTPRequestHandler):
    """Serves the fixtures directory plus a few synthetic endpoints, and
    counts hits per path so cache tests can observe upstream traffic."""

    hits = {}
    lock = threading.Lock()

    def log_message(self, *args):
        pass

    def _count(self):
        with FixtureHandler.lock:
            FixtureHandler.hits[self.path] = FixtureHandler.hits.get(self.path, 0) + 1

    def _send(self, status, ctype, body, headers=None):
        self.send_response(status)
        self.send_header("Content-Type", ctype)
        self.send_header("Content-Length", str(len(body)))
        for k, v in (headers or {}).items():
            self.send_header(k, v)
        self.end_headers()
        self.wfile.write(body)

    def do_GET(self):
        self._count()
        path = self.path.split("?", 1)[0]
        if path == "/image.png":
            return self._send(200, "image/png", PNG_BYTES)
        if path == "/redirect":
            self.send_response(302)
            self.send_header("Location", "/page3.html")
            self.send_header("Content-Length", "0")
            self.end_headers()
            return
        if path == "/page3.html":
            body = (b"<html><body>"
                    b'<a href="http://webservice.com/a">one</a>'
                    b'<a href="/rel">two</a>'
                    b'<img src="https://cdn.example.org/x.png">'
                    b"</body></html>")
            return self._send(200, "text/html", body)
        local = os.path.join(FIXTURES, path.lstrip("/"))
        if os.path.isfile(local):
            with open(local, "rb") as f:
                data = f.read()
            ctype = "text/html" if local.endswith(".html") else "application/xml"
            return self._send(200, ctype, data)
        self._send(404, "text/plain", b"not found")


@pytest.fixture(scope="session")
def fixture_server():
    server = ThreadingHTTPServer(("127.0.0.1", 0), FixtureHandler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    base = f"http://127.0.0.1:{server.server_port}"
    yield base
    server.shutdown()


@pytest.fixture()
def reset_hits():
    with FixtureHandler.lock:
        FixtureHandler.hits.clear()
    return FixtureHandler.hits


def make_gateway(tmp_path, **overrides) -> Gateway:
    cfg = GatewayConfig(data_dir=str(tmp_path / "data"),
                        allow_private_addresses=True, **overrides)
    return Gateway(cfg)


@pytest.fixture()
def gateway(tmp_path) -> Gateway:
    return make_gateway(tmp_path)


@pytest.fixture()
def client(gateway) -> TestClient:
    return TestClient(create_app(gateway))


def register_and_login(client, username, password="pw") -> dict:
    client.post("/api/register", json={"username": username, "password": password})
    r = client.post("/api/login", json={"username": username, "password": password})
    assert r.status_code == 200, r.text
    data = r.json()
    data["headers"] = {"X-Session-Token": data["token"]}
    return data


def load_fixture(*parts) -> bytes:
    with open(os.path.join(FIXTURES, *parts), "rb") as f:
        return f.read()


def load_json_fixture(*parts):
    return json.loads(load_fixture(*parts))
