"""User accounts and the single session token covering every service family.

Accounts persist as JSON under <data_dir>/accounts.json so users survive a
gateway restart; session tokens are in-memory and die with the process
(clients simply log in again).
"""

from __future__ import annotations

import hashlib
import json
import os
import secrets
import threading
from dataclasses import dataclass, field

from .clock import clock
from .errors import (
    BadCredentials,
    DuplicateUsername,
    EmptyUsername,
    ExpiredToken,
    InvalidToken,
)

PBKDF2_ITERATIONS = 20_000


def hash_password(password: str, salt: bytes) -> str:
    dk = hashlib.pbkdf2_hmac("sha256", password.encode(), salt, PBKDF2_ITERATIONS)
    return dk.hex()


@dataclass
class UserAccount:
    user_id: str
    username: str
    salt: str  # hex
    credential_hash: str  # hex
    created_at: float


@dataclass
class SessionToken:
    token: str
    user_id: str
    issued_at: float
    expires_at: float
    revoked: bool = False

    def is_valid(self, now: float) -> bool:
        return not self.revoked and now < self.expires_at


@dataclass
class AuthService:
    """Registration, login, token validation, logout."""

    data_dir: str
    session_ttl_hours: float = 24.0
    # prefs wiring: load at connection, save before disconnect completes
    on_connect: object = None
    on_disconnect: object = None

    _accounts: dict = field(default_factory=dict)  # username -> UserAccount
    _by_id: dict = field(default_factory=dict)  # user_id -> UserAccount
    _sessions: dict = field(default_factory=dict)  # token -> SessionToken
    _lock: threading.RLock = field(default_factory=threading.RLock)

    def __post_init__(self):
        self._load_accounts()

    # ---- persistence ----

    @property
    def _accounts_path(self) -> str:
        return os.path.join(self.data_dir, "accounts.json")

    def _load_accounts(self):
        try:
            with open(self._accounts_path) as f:
                raw = json.load(f)
        except FileNotFoundError:
            return
        for rec in raw:
            acct = UserAccount(**rec)
            self._accounts[acct.username] = acct
            self._by_id[acct.user_id] = acct

    def _save_accounts(self):
        os.makedirs(self.data_dir, exist_ok=True)
        tmp = self._accounts_path + ".tmp"
        with open(tmp, "w") as f:
            json.dump([vars(a) for a in self._accounts.values()], f)
        os.replace(tmp, self._accounts_path)

    # ---- operations ----

    def register_user(self, username: str, password: str) -> str:
        if not username:
            raise EmptyUsername("username must be non-empty")
        if len(password) < 1:
            raise BadCredentials("password must be non-empty")
        with self._lock:
            if username in self._accounts:
                raise DuplicateUsername(f"username already taken: {username}")
            salt = secrets.token_bytes(16)
            acct = UserAccount(
                user_id=secrets.token_hex(8),
                username=username,
                salt=salt.hex(),
                credential_hash=hash_password(password, salt),
                created_at=clock.now(),
            )
            self._accounts[username] = acct
            self._by_id[acct.user_id] = acct
            self._save_accounts()
            return acct.user_id

    def login(self, username: str, password: str) -> SessionToken:
        with self._lock:
            acct = self._accounts.get(username)
        if acct is None:
            # burn the same work as a real check: no timing/user enumeration
            hash_password(password, b"\x00" * 16)
            raise BadCredentials("bad credentials")
        if hash_password(password, bytes.fromhex(acct.salt)) != acct.credential_hash:
            raise BadCredentials("bad credentials")
        now = clock.now()
        tok = SessionToken(
            token=secrets.token_urlsafe(32),  # 256 bits
            user_id=acct.user_id,
            issued_at=now,
            expires_at=now + self.session_ttl_hours * 3600,
        )
        with self._lock:
            self._sessions[tok.token] = tok
        if self.on_connect is not None:
            self.on_connect(acct.user_id)
        return tok

    def authenticate(self, token: str) -> str:
        with self._lock:
            sess = self._sessions.get(token)
            if sess is None or sess.revoked:
                raise InvalidToken("invalid token")
            if clock.now() >= sess.expires_at:
                raise ExpiredToken("token expired")
            return sess.user_id

    def logout(self, token: str) -> None:
        with self._lock:
            sess = self._sessions.get(token)
            if sess is None or sess.revoked:
                raise InvalidToken("invalid token")
            user_id = sess.user_id
        if self.on_disconnect is not None:
            self.on_disconnect(user_id)
        with self._lock:
            sess.revoked = True

    # ---- queries used by other modules ----

    def user_exists(self, user_id: str) -> bool:
        return user_id in self._by_id

    def username_of(self, user_id: str) -> str | None:
        acct = self._by_id.get(user_id)
        return acct.username if acct else None

    def user_id_of(self, username: str) -> str | None:
        acct = self._accounts.get(username)
        return acct.user_id if acct else None

    def all_user_ids(self) -> list:
        return list(self._by_id)

    def active_session_count(self) -> int:
        now = clock.now()
        with self._lock:
            return sum(1 for s in self._sessions.values() if s.is_valid(now))

    def live_user_ids(self) -> list:
        now = clock.now()
        with self._lock:
            return sorted({s.user_id for s in self._sessions.values() if s.is_valid(now)})
