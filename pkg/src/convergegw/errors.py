"""Error model shared by every service family.

All failures surface as ApiError with a stable machine-readable code; the
HTTP layer serializes them as {"code": ..., "message": ...} so clients and
tests can key on codes rather than message text.
"""

from __future__ import annotations


class ApiError(Exception):
    """A failure with a stable code string and an HTTP status."""

    code = "internal_error"
    http_status = 500

    def __init__(self, message: str = "", *, code: str | None = None,
                 http_status: int | None = None):
        if code is not None:
            self.code = code
        if http_status is not None:
            self.http_status = http_status
        self.message = message or self.code
        super().__init__(self.message)

    def to_body(self) -> dict:
        return {"code": self.code, "message": self.message}


def _make(name: str, code: str, status: int) -> type:
    return type(name, (ApiError,), {"code": code, "http_status": status})


# auth
DuplicateUsername = _make("DuplicateUsername", "duplicate_username", 409)
EmptyUsername = _make("EmptyUsername", "empty_username", 400)
BadCredentials = _make("BadCredentials", "bad_credentials", 401)
InvalidToken = _make("InvalidToken", "invalid_token", 401)
ExpiredToken = _make("ExpiredToken", "expired_token", 401)
Unauthorized = _make("Unauthorized", "unauthorized", 401)

# widget registry
InvalidDescriptor = _make("InvalidDescriptor", "invalid_descriptor", 400)
NoHandlerDeclared = _make("NoHandlerDeclared", "no_handler_declared", 400)
UnknownInstance = _make("UnknownInstance", "unknown_instance", 404)
UnknownWidget = _make("UnknownWidget", "unknown_widget", 404)

# proxy
UnsupportedScheme = _make("UnsupportedScheme", "unsupported_scheme", 400)
BlockedTarget = _make("BlockedTarget", "blocked_target", 403)
UpstreamTimeout = _make("UpstreamTimeout", "upstream_timeout", 504)
UpstreamUnreachable = _make("UpstreamUnreachable", "upstream_unreachable", 502)

# feeds
MalformedXml = _make("MalformedXml", "malformed_xml", 422)
NotRss = _make("NotRss", "not_rss", 422)
NotAtom = _make("NotAtom", "not_atom", 422)
UnrecognizedFeedRoot = _make("UnrecognizedFeedRoot", "unrecognized_feed_root", 422)

# telecom
UnknownUser = _make("UnknownUser", "unknown_user", 404)
NoteTooLong = _make("NoteTooLong", "note_too_long", 400)
BodyTooLong = _make("BodyTooLong", "body_too_long", 400)
SelfCall = _make("SelfCall", "self_call", 400)
UnknownSession = _make("UnknownSession", "unknown_session", 404)
NotCallee = _make("NotCallee", "not_callee", 403)
NotParticipant = _make("NotParticipant", "not_participant", 403)
InvalidTransition = _make("InvalidTransition", "invalid_transition", 409)
SlotTaken = _make("SlotTaken", "slot_taken", 409)

# coordination
EmptyServiceId = _make("EmptyServiceId", "empty_service_id", 400)
UnknownActivity = _make("UnknownActivity", "unknown_activity", 404)
ContextClosed = _make("ContextClosed", "context_closed", 409)
DuplicateRegistration = _make("DuplicateRegistration", "duplicate_registration", 409)

# prefs
CellOccupied = _make("CellOccupied", "cell_occupied", 409)
UnknownTab = _make("UnknownTab", "unknown_tab", 404)
LastTab = _make("LastTab", "last_tab", 409)
TabNotEmpty = _make("TabNotEmpty", "tab_not_empty", 409)
StorageFailure = _make("StorageFailure", "storage_failure", 500)

# gateway
BadConfig = _make("BadConfig", "bad_config", 400)
PortInUse = _make("PortInUse", "port_in_use", 500)
SeedFileInvalid = _make("SeedFileInvalid", "seed_file_invalid", 400)
