"""Desk-scale telecom enablers: presence, instant messaging, call sessions,
speed dial, and the long-poll event channel the dashboard updates from.

Calls are signaling-only. "active" means both parties acknowledged; there
is no media plane.
"""

from __future__ import annotations

import secrets
import threading
from dataclasses import dataclass, field

from .clock import clock
from .errors import (
    ApiError,
    BodyTooLong,
    InvalidTransition,
    NotCallee,
    NotParticipant,
    NoteTooLong,
    SelfCall,
    SlotTaken,
    UnknownSession,
    UnknownUser,
)

MAX_NOTE_LEN = 256
MAX_BODY_LEN = 4096
MAX_POLL_WAIT_MS = 30_000

PRESENCE_STATUSES = {"available", "busy", "offline"}
CALL_LIVE_STATES = {"inviting", "ringing", "active"}
CALL_FINAL_STATES = {"terminated", "rejected", "failed"}


@dataclass
class PresenceState:
    user_id: str
    status: str = "offline"
    note: str = ""
    updated_at: float = 0.0

    def to_dict(self) -> dict:
        return {"user_id": self.user_id, "status": self.status,
                "note": self.note, "updated_at": self.updated_at}


@dataclass
class ChatMessage:
    message_id: str
    sender: str
    recipient: str
    body: str
    sent_at: float
    seq: int

    def to_dict(self) -> dict:
        return {"message_id": self.message_id, "from": self.sender,
                "to": self.recipient, "body": self.body,
                "sent_at": self.sent_at, "seq": self.seq}


@dataclass
class CallSession:
    session_id: str
    caller: str
    callee: str
    state: str
    created_at: float
    answered_at: float | None = None
    ended_at: float | None = None
    activity_id: str | None = None

    def to_dict(self) -> dict:
        return {"session_id": self.session_id, "caller": self.caller,
                "callee": self.callee, "state": self.state,
                "created_at": self.created_at, "answered_at": self.answered_at,
                "ended_at": self.ended_at, "activity_id": self.activity_id}


@dataclass
class SpeedDialEntry:
    owner: str
    slot: int
    target: str
    label: str

    def to_dict(self) -> dict:
        return {"owner": self.owner, "slot": self.slot,
                "target": self.target, "label": self.label}


@dataclass
class Event:
    event_id: int
    recipient: str
    kind: str
    payload: dict
    created_at: float

    def to_dict(self) -> dict:
        return {"event_id": self.event_id, "recipient": self.recipient,
                "kind": self.kind, "payload": self.payload,
                "created_at": self.created_at}


class EventBus:
    """Per-user event log with strictly increasing ids and blocking polls."""

    def __init__(self):
        self._cond = threading.Condition()
        self._events: dict[str, list[Event]] = {}
        self._next_id: dict[str, int] = {}
        self._waiting: dict[str, int] = {}

    def publish(self, recipient: str, kind: str, payload: dict) -> Event:
        with self._cond:
            eid = self._next_id.get(recipient, 0) + 1
            self._next_id[recipient] = eid
            ev = Event(eid, recipient, kind, payload, clock.now())
            self._events.setdefault(recipient, []).append(ev)
            self._cond.notify_all()
            return ev

    def poll(self, user_id: str, cursor: int, wait_ms: int = 0) -> tuple[list[Event], int]:
        wait_ms = max(0, min(wait_ms, MAX_POLL_WAIT_MS))
        deadline = clock.now() + wait_ms / 1000.0
        with self._cond:
            while True:
                pending = [e for e in self._events.get(user_id, []) if e.event_id > cursor]
                if pending or wait_ms == 0:
                    break
                remaining = deadline - clock.now()
                if remaining <= 0:
                    break
                self._waiting[user_id] = self._waiting.get(user_id, 0) + 1
                try:
                    self._cond.wait(remaining)
                finally:
                    self._waiting[user_id] -= 1
            next_cursor = pending[-1].event_id if pending else cursor
            return pending, next_cursor

    def has_waiting_poll(self, user_id: str) -> bool:
        with self._cond:
            return self._waiting.get(user_id, 0) > 0


class TelecomService:
    """Presence, IM, calls, and speed dial over one event bus."""

    def __init__(self, user_exists, username_of=None, coordinator=None,
                 coordinate_calls: bool = False, dashboard_services=None):
        self.user_exists = user_exists
        self.username_of = username_of or (lambda uid: uid)
        self.coordinator = coordinator
        self.coordinate_calls = coordinate_calls
        self.dashboard_services = dashboard_services or (lambda uid: [])
        self.events = EventBus()
        self._lock = threading.RLock()
        self._presence: dict[str, PresenceState] = {}
        self._messages: list[ChatMessage] = []
        self._seq: dict[tuple, int] = {}
        self._calls: dict[str, CallSession] = {}
        self._speed_dial: dict[str, dict[int, SpeedDialEntry]] = {}

    # ---- presence ----

    def set_presence(self, user_id: str, status: str, note: str = "") -> PresenceState:
        if status not in PRESENCE_STATUSES:
            raise ApiError(f"unknown presence status: {status}",
                           code="invalid_status", http_status=400)
        if len(note) > MAX_NOTE_LEN:
            raise NoteTooLong(f"note exceeds {MAX_NOTE_LEN} chars")
        with self._lock:
            state = PresenceState(user_id, status, note, clock.now())
            self._presence[user_id] = state
            watchers = [owner for owner, entries in self._speed_dial.items()
                        if any(e.target == user_id for e in entries.values())]
        for owner in watchers:
            self.events.publish(owner, "presence_changed", state.to_dict())
        return state

    def get_presence(self, user_id: str) -> PresenceState:
        if not self.user_exists(user_id):
            raise UnknownUser(f"no such user: {user_id}")
        with self._lock:
            return self._presence.get(user_id, PresenceState(user_id))

    # ---- messaging ----

    def send_message(self, sender: str, recipient: str, body: str) -> ChatMessage:
        if not self.user_exists(recipient):
            raise UnknownUser(f"no such user: {recipient}")
        if len(body) > MAX_BODY_LEN:
            raise BodyTooLong(f"body exceeds {MAX_BODY_LEN} chars")
        with self._lock:
            key = (sender, recipient)
            seq = self._seq.get(key, 0) + 1
            self._seq[key] = seq
            msg = ChatMessage(secrets.token_hex(8), sender, recipient, body,
                              clock.now(), seq)
            self._messages.append(msg)
        self.events.publish(recipient, "message", msg.to_dict())
        return msg

    def list_messages(self, user_id: str, peer: str) -> list[ChatMessage]:
        with self._lock:
            return [m for m in self._messages
                    if {m.sender, m.recipient} == {user_id, peer}]

    # ---- calls ----

    def _get_call(self, session_id: str) -> CallSession:
        sess = self._calls.get(session_id)
        if sess is None:
            raise UnknownSession(f"no such call session: {session_id}")
        return sess

    def place_call(self, caller: str, callee: str) -> CallSession:
        if caller == callee:
            raise SelfCall("cannot call yourself")
        if not self.user_exists(callee):
            raise UnknownUser(f"no such user: {callee}")
        with self._lock:
            sess = CallSession(secrets.token_hex(8), caller, callee,
                               "inviting", clock.now())
            self._calls[sess.session_id] = sess
            callee_presence = self._presence.get(callee, PresenceState(callee))
            reachable = (callee_presence.status != "offline"
                         or self.events.has_waiting_poll(callee))
            if reachable:
                sess.state = "ringing"
            else:
                sess.state = "failed"
                sess.ended_at = clock.now()
        if sess.state == "ringing":
            self.events.publish(callee, "incoming_call", sess.to_dict())
            if self.coordinate_calls and self.coordinator is not None:
                ctx = self.coordinator.create_context("call-service")
                self.coordinator.register_participant(ctx.activity_id,
                                                      "call-service", "session")
                for svc in self.dashboard_services(caller):
                    self.coordinator.propagate_context(ctx.activity_id, svc)
                sess.activity_id = ctx.activity_id
        else:
            # offline callee: leave a voicemail text artifact instead of ringing
            self.send_message(caller, callee,
                              f"Missed call from {self.username_of(caller)}")
        return sess

    def _check_participant(self, sess: CallSession, user_id: str):
        if user_id not in (sess.caller, sess.callee):
            raise NotParticipant("not a participant in this call")

    def answer_call(self, user_id: str, session_id: str) -> CallSession:
        with self._lock:
            sess = self._get_call(session_id)
            self._check_participant(sess, user_id)
            if user_id != sess.callee:
                raise NotCallee("only the callee may answer")
            if sess.state != "ringing":
                raise InvalidTransition(f"cannot answer call in state {sess.state}")
            sess.state = "active"
            sess.answered_at = clock.now()
        self.events.publish(sess.caller, "call_state_changed", sess.to_dict())
        return sess

    def reject_call(self, user_id: str, session_id: str) -> CallSession:
        with self._lock:
            sess = self._get_call(session_id)
            self._check_participant(sess, user_id)
            if user_id != sess.callee:
                raise NotCallee("only the callee may reject")
            if sess.state != "ringing":
                raise InvalidTransition(f"cannot reject call in state {sess.state}")
            sess.state = "rejected"
            sess.ended_at = clock.now()
        self.events.publish(sess.caller, "call_state_changed", sess.to_dict())
        return sess

    def hangup(self, user_id: str, session_id: str) -> CallSession:
        with self._lock:
            sess = self._get_call(session_id)
            self._check_participant(sess, user_id)
            if sess.state not in CALL_LIVE_STATES:
                raise InvalidTransition(f"cannot hang up call in state {sess.state}")
            sess.state = "terminated"
            sess.ended_at = clock.now()
        other = sess.callee if user_id == sess.caller else sess.caller
        self.events.publish(other, "call_state_changed", sess.to_dict())
        return sess

    def get_call(self, user_id: str, session_id: str) -> CallSession:
        with self._lock:
            sess = self._get_call(session_id)
            self._check_participant(sess, user_id)
            return sess

    # ---- events ----

    def poll_events(self, user_id: str, cursor: int, wait_ms: int = 0):
        return self.events.poll(user_id, cursor, wait_ms)

    # ---- speed dial ----

    def add_speed_dial(self, owner: str, slot: int, target: str, label: str) -> SpeedDialEntry:
        if slot < 1:
            raise ApiError("slot must be a positive integer",
                           code="invalid_slot", http_status=400)
        if not self.user_exists(target):
            raise UnknownUser(f"no such user: {target}")
        with self._lock:
            entries = self._speed_dial.setdefault(owner, {})
            if slot in entries:
                raise SlotTaken(f"slot already assigned: {slot}")
            entry = SpeedDialEntry(owner, slot, target, label)
            entries[slot] = entry
            return entry

    def remove_speed_dial(self, owner: str, slot: int):
        with self._lock:
            entries = self._speed_dial.get(owner, {})
            if slot not in entries:
                raise ApiError(f"no entry in slot {slot}",
                               code="unknown_slot", http_status=404)
            del entries[slot]

    def list_speed_dial(self, owner: str) -> list[SpeedDialEntry]:
        with self._lock:
            entries = self._speed_dial.get(owner, {})
            return [entries[s] for s in sorted(entries)]
