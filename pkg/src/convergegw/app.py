"""HTTP surface of the gateway: every service family behind one origin.

All authenticated routes take the session token from the X-Session-Token
header; a middleware enforces it uniformly so no route can grow its own
credential. Errors serialize as {"code": ..., "message": ...}.
"""

from __future__ import annotations

from urllib.parse import unquote

from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .errors import ApiError, InvalidToken, Unauthorized
from .gateway import Gateway

TOKEN_HEADER = "X-Session-Token"
ADMIN_HEADER = "X-Admin-Token"

# /api/* routes reachable without a session token
OPEN_API_PATHS = {"/api/register", "/api/login"}


def _error_response(err: ApiError) -> JSONResponse:
    return JSONResponse(status_code=err.http_status, content=err.to_body())


def _is_admin_route(method: str, path: str) -> bool:
    return path.startswith("/api/admin/") or (method == "POST" and path == "/api/widgets")


def create_app(gateway: Gateway) -> FastAPI:
    app = FastAPI(title="converge-gw", docs_url=None, redoc_url=None)
    app.state.gateway = gateway
    gw = gateway

    @app.exception_handler(ApiError)
    async def handle_api_error(_request, exc: ApiError):
        return _error_response(exc)

    @app.middleware("http")
    async def require_session(request: Request, call_next):
        path = request.url.path
        needs_auth = (path.startswith("/api/") and path not in OPEN_API_PATHS) \
            or path == "/proxy.php"
        if needs_auth:
            if _is_admin_route(request.method, path):
                if request.headers.get(ADMIN_HEADER) == gw.config.admin_token:
                    request.state.user_id = None
                    return await call_next(request)
                return _error_response(Unauthorized("admin credential required"))
            token = request.headers.get(TOKEN_HEADER)
            if not token:
                return _error_response(InvalidToken("missing session token"))
            try:
                request.state.user_id = gw.auth.authenticate(token)
                request.state.token = token
            except ApiError as e:
                return _error_response(e)
        return await call_next(request)

    async def _json(request: Request) -> dict:
        try:
            body = await request.json()
        except Exception:
            raise ApiError("request body must be JSON", code="bad_request",
                           http_status=400)
        if not isinstance(body, dict):
            raise ApiError("request body must be a JSON object",
                           code="bad_request", http_status=400)
        return body

    def _require(body: dict, *names):
        missing = [n for n in names if n not in body]
        if missing:
            raise ApiError(f"missing fields: {', '.join(missing)}",
                           code="bad_request", http_status=400)
        return [body[n] for n in names]

    # ---- health ----

    @app.get("/healthz")
    def healthz():
        return gw.healthcheck()

    # ---- auth ----

    @app.post("/api/register")
    async def register(request: Request):
        username, password = _require(await _json(request), "username", "password")
        return {"user_id": gw.auth.register_user(username, password)}

    @app.post("/api/login")
    async def login(request: Request):
        username, password = _require(await _json(request), "username", "password")
        tok = gw.auth.login(username, password)
        return {"token": tok.token, "expires_at": tok.expires_at,
                "user_id": tok.user_id, "username": username}

    @app.post("/api/logout")
    def logout(request: Request):
        gw.auth.logout(request.state.token)
        return {"ok": True}

    @app.get("/api/users")
    def list_users(request: Request):
        return {"users": [
            {"user_id": uid, "username": gw.auth.username_of(uid)}
            for uid in sorted(gw.auth.all_user_ids(),
                              key=lambda u: gw.auth.username_of(u) or "")
        ]}

    # ---- widget registry ----

    @app.get("/api/widgets")
    def list_widgets(request: Request):
        return {"widgets": [d.to_dict() for d in gw.registry.list_widgets()]}

    @app.post("/api/widgets")
    async def register_widget(request: Request):
        from .registry import WidgetDescriptor
        body = await _json(request)
        try:
            desc = WidgetDescriptor(**body)
        except TypeError as e:
            raise ApiError(f"bad descriptor: {e}", code="invalid_descriptor",
                           http_status=400)
        return {"widget_id": gw.registry.register_widget(desc)}

    # ---- proxy ----

    @app.get("/proxy.php")
    def proxy(request: Request, url: str = ""):
        from .proxy import fetch_proxied
        if not url:
            raise ApiError("missing url parameter", code="bad_request",
                           http_status=400)
        target = unquote(url)
        gateway_base = str(request.base_url).rstrip("/")
        result = fetch_proxied(gw.fetcher, target, gateway_base)
        headers = {"X-Rewritten-Link-Count": str(result.rewritten_link_count)}
        if result.location:
            headers["Location"] = result.location
        return Response(content=result.body, status_code=result.upstream_status,
                        media_type=result.content_type, headers=headers)

    # ---- feeds ----

    @app.get("/api/feed")
    def get_feed(request: Request, url: str = ""):
        if not url:
            raise ApiError("missing url parameter", code="bad_request",
                           http_status=400)
        return gw.feeds.fetch_feed(unquote(url)).to_dict()

    @app.get("/api/feed/merged")
    def merged_feed(request: Request, limit: int = 20):
        from .feeds import merge_items
        docs = []
        for url, ttl in gw.feed_subscriptions(request.state.user_id):
            docs.append(gw.feeds.fetch_feed(url, ttl))
        return {"items": [it.to_dict() for it in merge_items(docs, limit)]}

    # ---- presence ----

    @app.post("/api/presence")
    async def set_presence(request: Request):
        body = await _json(request)
        (status,) = _require(body, "status")
        state = gw.telecom.set_presence(request.state.user_id, status,
                                        body.get("note", ""))
        return state.to_dict()

    @app.get("/api/presence/{user_id}")
    def get_presence(request: Request, user_id: str):
        return gw.telecom.get_presence(user_id).to_dict()

    # ---- messaging ----

    @app.post("/api/messages")
    async def send_message(request: Request):
        to, body_text = _require(await _json(request), "to", "body")
        msg = gw.telecom.send_message(request.state.user_id, to, body_text)
        return msg.to_dict()

    @app.get("/api/messages")
    def list_messages(request: Request, peer: str = ""):
        msgs = gw.telecom.list_messages(request.state.user_id, peer)
        return {"messages": [m.to_dict() for m in msgs]}

    # ---- calls ----

    @app.post("/api/calls")
    async def place_call(request: Request):
        (callee,) = _require(await _json(request), "callee")
        return gw.telecom.place_call(request.state.user_id, callee).to_dict()

    @app.get("/api/calls/{session_id}")
    def get_call(request: Request, session_id: str):
        return gw.telecom.get_call(request.state.user_id, session_id).to_dict()

    @app.post("/api/calls/{session_id}/answer")
    def answer_call(request: Request, session_id: str):
        return gw.telecom.answer_call(request.state.user_id, session_id).to_dict()

    @app.post("/api/calls/{session_id}/reject")
    def reject_call(request: Request, session_id: str):
        return gw.telecom.reject_call(request.state.user_id, session_id).to_dict()

    @app.post("/api/calls/{session_id}/hangup")
    def hangup_call(request: Request, session_id: str):
        return gw.telecom.hangup(request.state.user_id, session_id).to_dict()

    # ---- events ----

    @app.get("/api/events")
    def poll_events(request: Request, cursor: int = 0, wait_ms: int = 0):
        events, next_cursor = gw.telecom.poll_events(request.state.user_id,
                                                     cursor, wait_ms)
        return {"events": [e.to_dict() for e in events],
                "next_cursor": next_cursor}

    # ---- speed dial ----

    @app.get("/api/speeddial")
    def list_speed_dial(request: Request):
        entries = gw.telecom.list_speed_dial(request.state.user_id)
        return {"entries": [e.to_dict() for e in entries]}

    @app.post("/api/speeddial")
    async def add_speed_dial(request: Request):
        body = await _json(request)
        slot, target = _require(body, "slot", "target")
        entry = gw.telecom.add_speed_dial(request.state.user_id, int(slot),
                                          target, body.get("label", ""))
        return entry.to_dict()

    @app.delete("/api/speeddial/{slot}")
    def remove_speed_dial(request: Request, slot: int):
        gw.telecom.remove_speed_dial(request.state.user_id, slot)
        return {"ok": True}

    # ---- coordination ----

    @app.post("/api/coord/contexts")
    async def create_context(request: Request):
        (service,) = _require(await _json(request), "requesting_service")
        return gw.coordinator.create_context(service).to_dict()

    @app.post("/api/coord/contexts/{activity_id}/register")
    async def register_participant(request: Request, activity_id: str):
        service_id, role = _require(await _json(request), "service_id", "role")
        return gw.coordinator.register_participant(activity_id, service_id,
                                                   role).to_dict()

    @app.post("/api/coord/contexts/{activity_id}/propagate")
    async def propagate_context(request: Request, activity_id: str):
        (target,) = _require(await _json(request), "target_service")
        return gw.coordinator.propagate_context(activity_id, target).to_dict()

    @app.get("/api/coord/contexts/{activity_id}/participants")
    def list_participants(request: Request, activity_id: str):
        regs = gw.coordinator.list_participants(activity_id)
        return {"participants": [r.to_dict() for r in regs]}

    @app.post("/api/coord/contexts/{activity_id}/close")
    def close_context(request: Request, activity_id: str):
        gw.coordinator.close_context(activity_id)
        return {"ok": True}

    # ---- dashboard / prefs ----

    @app.get("/api/dashboard")
    def get_dashboard(request: Request):
        return gw.prefs.get_dashboard(request.state.user_id).to_dict()

    @app.post("/api/dashboard/widgets")
    async def add_widget(request: Request):
        body = await _json(request)
        tab_id, widget_id, col, row = _require(body, "tab_id", "widget_id",
                                               "col", "row")
        inst = gw.prefs.add_widget(request.state.user_id, tab_id, widget_id,
                                   int(col), int(row), body.get("config"))
        return inst.to_dict()

    @app.patch("/api/dashboard/widgets/{instance_id}")
    async def patch_widget(request: Request, instance_id: str):
        body = await _json(request)
        user_id = request.state.user_id
        if "config" in body:
            inst = gw.prefs.set_widget_config(user_id, instance_id,
                                              body["config"])
        else:
            tab_id, col, row = _require(body, "tab_id", "col", "row")
            inst = gw.prefs.move_widget(user_id, instance_id, tab_id,
                                        int(col), int(row))
        return inst.to_dict()

    @app.delete("/api/dashboard/widgets/{instance_id}")
    def delete_widget(request: Request, instance_id: str):
        gw.prefs.remove_widget(request.state.user_id, instance_id)
        return {"ok": True}

    @app.post("/api/dashboard/tabs")
    async def create_tab(request: Request):
        (title,) = _require(await _json(request), "title")
        return gw.prefs.create_tab(request.state.user_id, title).to_dict()

    @app.patch("/api/dashboard/tabs/{tab_id}")
    async def rename_tab(request: Request, tab_id: str):
        (title,) = _require(await _json(request), "title")
        return gw.prefs.rename_tab(request.state.user_id, tab_id, title).to_dict()

    @app.delete("/api/dashboard/tabs/{tab_id}")
    def delete_tab(request: Request, tab_id: str, cascade: bool = False):
        gw.prefs.delete_tab(request.state.user_id, tab_id, cascade=cascade)
        return {"ok": True}

    @app.post("/api/dashboard/tabs/reorder")
    async def reorder_tabs(request: Request):
        (tab_ids,) = _require(await _json(request), "tab_ids")
        tabs = gw.prefs.reorder_tabs(request.state.user_id, tab_ids)
        return {"tabs": [t.to_dict() for t in tabs]}

    # ---- admin ----

    @app.get("/api/admin/usage")
    def usage(request: Request):
        return gw.usage_report().to_dict()

    @app.on_event("shutdown")
    def _shutdown():
        gw.shutdown()

    # static dashboard bundle; the gateway runs headless when absent
    import os
    if gw.config.ui_dir and os.path.isdir(gw.config.ui_dir):
        app.mount("/", StaticFiles(directory=gw.config.ui_dir, html=True),
                  name="ui")

    return app
