"""Service coordinator: activity contexts, participant registration, and
context propagation between services taking part in one mashup activity.

Contexts are in-memory; activities are short-lived mashup scopes, so a
close operation bounds growth.
"""

from __future__ import annotations

import threading
import uuid
from dataclasses import dataclass

from .clock import clock
from .errors import (
    ContextClosed,
    DuplicateRegistration,
    EmptyServiceId,
    UnknownActivity,
)


@dataclass
class CoordinationContext:
    activity_id: str
    creator_service: str
    created_at: float
    closed: bool = False

    def to_dict(self) -> dict:
        return {"activity_id": self.activity_id,
                "creator_service": self.creator_service,
                "created_at": self.created_at, "closed": self.closed}


@dataclass
class ParticipantRegistration:
    activity_id: str
    service_id: str
    role: str
    registered_at: float

    def to_dict(self) -> dict:
        return {"activity_id": self.activity_id, "service_id": self.service_id,
                "role": self.role, "registered_at": self.registered_at}


class Coordinator:
    def __init__(self):
        self._lock = threading.RLock()
        self._contexts: dict[str, CoordinationContext] = {}
        self._participants: dict[str, list[ParticipantRegistration]] = {}
        self._audits: dict[str, list[dict]] = {}

    def _get_open(self, activity_id: str) -> CoordinationContext:
        ctx = self._contexts.get(activity_id)
        if ctx is None:
            raise UnknownActivity(f"no such activity: {activity_id}")
        if ctx.closed:
            raise ContextClosed(f"activity closed: {activity_id}")
        return ctx

    def create_context(self, requesting_service: str) -> CoordinationContext:
        if not requesting_service:
            raise EmptyServiceId("service id must be non-empty")
        ctx = CoordinationContext(uuid.uuid4().hex, requesting_service, clock.now())
        with self._lock:
            self._contexts[ctx.activity_id] = ctx
            self._participants[ctx.activity_id] = []
            self._audits[ctx.activity_id] = []
        return ctx

    def get_context(self, activity_id: str) -> CoordinationContext:
        with self._lock:
            ctx = self._contexts.get(activity_id)
        if ctx is None:
            raise UnknownActivity(f"no such activity: {activity_id}")
        return ctx

    def register_participant(self, activity_id: str, service_id: str,
                             role: str) -> ParticipantRegistration:
        with self._lock:
            self._get_open(activity_id)
            regs = self._participants[activity_id]
            if any(r.service_id == service_id and r.role == role for r in regs):
                raise DuplicateRegistration(
                    f"({service_id}, {role}) already registered in {activity_id}")
            reg = ParticipantRegistration(activity_id, service_id, role, clock.now())
            regs.append(reg)
            return reg

    def propagate_context(self, activity_id: str, target_service: str) -> CoordinationContext:
        """Hands the context to another service; registration stays the
        target's own move afterward. Only an audit record is kept."""
        with self._lock:
            ctx = self._get_open(activity_id)
            self._audits[activity_id].append(
                {"target_service": target_service, "at": clock.now()})
            return ctx

    def list_participants(self, activity_id: str) -> list[ParticipantRegistration]:
        with self._lock:
            if activity_id not in self._contexts:
                raise UnknownActivity(f"no such activity: {activity_id}")
            return sorted(self._participants[activity_id],
                          key=lambda r: r.registered_at)

    def propagation_audit(self, activity_id: str) -> list[dict]:
        with self._lock:
            if activity_id not in self._contexts:
                raise UnknownActivity(f"no such activity: {activity_id}")
            return list(self._audits[activity_id])

    def close_context(self, activity_id: str):
        with self._lock:
            ctx = self._contexts.get(activity_id)
            if ctx is None:
                raise UnknownActivity(f"no such activity: {activity_id}")
            ctx.closed = True  # idempotent
