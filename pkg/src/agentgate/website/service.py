"""Website domain logic.

Agents authenticate by proving possession of an Auth-issued session key:
the site hands out a single-use 32-digit nonce, the agent returns an HMAC
over it, and the site checks the tag against the key it retrieves from
Auth (once per key id, then served from cache). Authenticated sessions
live for the relative validity period Auth attached to the key, and every
data request is evaluated against the owner-configured scope of the
agent's group at request time.
"""

from __future__ import annotations

import threading
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Iterable

from agentgate.core import (
    Clock,
    CryptoSpec,
    DEFAULT_CRYPTO_SPEC,
    RandomSource,
    SystemClock,
    SystemRandomSource,
    compute_hmac,
    constant_time_equal,
    generate_nonce,
)
from agentgate.authclient import AuthApiClient, AuthApiError

PROFILE_FIELDS = ("email", "phone", "address", "card")
CHALLENGE_TTL_SECONDS = 120.0
AUDIT_CAPACITY = 1000

DEFAULT_SCOPE_MAP = {
    "LowTrustAgents": (frozenset({"email"}), False),
    "MediumTrustAgents": (frozenset({"email", "phone"}), False),
    "HighTrustAgents": (frozenset(PROFILE_FIELDS), True),
}


class WebsiteError(Exception):
    code = "website_error"


class ChallengeError(WebsiteError):
    code = "challenge_error"


class AuthenticationFailed(WebsiteError):
    code = "authentication_failure"


class KeyExpiredError(WebsiteError):
    code = "expired_key"


class SessionError(WebsiteError):
    code = "session_error"


class AccessDenied(WebsiteError):
    code = "access_denied"


class UnknownField(WebsiteError):
    code = "unknown_field"


class UsageError(WebsiteError):
    code = "usage_error"


@dataclass(frozen=True)
class UserProfile:
    user: str
    email: str
    phone: str
    address: str
    card: str  # stored pre-masked; real PANs never enter the system

    def value_of(self, field_name: str) -> str:
        if field_name not in PROFILE_FIELDS:
            raise UnknownField(f"no such profile field: {field_name}")
        return getattr(self, field_name)


@dataclass(frozen=True)
class ScopePolicy:
    agent_group: str
    allowed_fields: frozenset[str]
    may_purchase: bool

    def __post_init__(self) -> None:
        unknown = self.allowed_fields - set(PROFILE_FIELDS)
        if unknown:
            raise UsageError(f"unknown profile fields: {sorted(unknown)}")
        if self.may_purchase and not {"address", "card", "phone"} <= self.allowed_fields:
            raise UsageError("purchase capability requires address, card and phone scope")


@dataclass
class Challenge:
    challenge_id: str
    nonce: str
    issued_at: float
    consumed: bool = False


@dataclass(frozen=True)
class AgentSession:
    session_token: str
    agent: str
    agent_group: str
    session_key_id: int
    started_at: float
    expires_at: float


@dataclass(frozen=True)
class PurchaseRecord:
    id: int
    session_token: str
    item: str
    shipping_address: str
    card: str
    phone: str
    placed_at: float
    status: str = "simulated"


@dataclass
class CachedWebsiteKey:
    session_key_id: int
    key: bytes
    agent_owner: tuple[str, str] | None  # (entity, group); None if agent never redeemed
    relative_validity: float
    absolute_expiration: float


class WebsiteService:
    def __init__(
        self,
        *,
        auth_client: AuthApiClient,
        profile: UserProfile,
        clock: Clock | None = None,
        rng: RandomSource | None = None,
        crypto_spec: CryptoSpec = DEFAULT_CRYPTO_SPEC,
        scope_map: dict[str, tuple[frozenset[str], bool]] | None = None,
    ) -> None:
        self.clock = clock or SystemClock()
        self.rng = rng or SystemRandomSource()
        self.profile = profile
        self.spec = crypto_spec
        self._auth = auth_client
        self._challenges: dict[str, Challenge] = {}
        self._sessions: dict[str, AgentSession] = {}
        self._scopes: dict[str, ScopePolicy] = {}
        self._keys: dict[int, CachedWebsiteKey] = {}
        self._key_flights: dict[int, threading.Lock] = {}
        self._purchases: list[PurchaseRecord] = []
        self._next_purchase_id = 1
        self._audit: deque[dict[str, Any]] = deque(maxlen=AUDIT_CAPACITY)
        self._auth_redemptions: dict[int, int] = {}
        self._lock = threading.RLock()
        for group, (fields, may_purchase) in (scope_map or DEFAULT_SCOPE_MAP).items():
            self._scopes[group] = ScopePolicy(group, frozenset(fields), may_purchase)

    # -- login ----------------------------------------------------------------

    def issue_challenge(self) -> Challenge:
        with self._lock:
            now = self.clock.now()
            self._prune_challenges(now)
            challenge = Challenge(
                challenge_id=self.rng.token_bytes(16).hex(),
                nonce=generate_nonce(self.rng),
                issued_at=now,
            )
            self._challenges[challenge.challenge_id] = challenge
            return challenge

    def authenticate_agent(
        self, challenge_id: str, session_key_id: int, agent_tag: bytes
    ) -> AgentSession:
        with self._lock:
            challenge = self._challenges.get(challenge_id)
            now = self.clock.now()
            if challenge is None:
                raise ChallengeError("unknown challenge")
            if challenge.consumed:
                raise ChallengeError("challenge already used")
            if now >= challenge.issued_at + CHALLENGE_TTL_SECONDS:
                raise ChallengeError("challenge expired")
            # single use: any verification attempt burns the challenge
            challenge.consumed = True

        try:
            cached = self.fetch_key_from_auth(session_key_id)
        except (AuthenticationFailed, KeyExpiredError) as exc:
            self._record("login_failure", detail=str(exc), session_key_id=session_key_id)
            raise
        if cached.agent_owner is None:
            self._record("login_failure", detail="no agent owner", session_key_id=session_key_id)
            raise AuthenticationFailed("no agent has redeemed this session key")

        expected = compute_hmac(cached.key, challenge.nonce.encode("ascii"), self.spec)
        if not constant_time_equal(expected, agent_tag):
            self._record(
                "login_failure",
                detail="hmac mismatch",
                agent=cached.agent_owner[0],
                session_key_id=session_key_id,
            )
            raise AuthenticationFailed("HMAC verification failed")

        agent, agent_group = cached.agent_owner
        with self._lock:
            now = self.clock.now()
            session = AgentSession(
                session_token=self.rng.token_bytes(32).hex(),
                agent=agent,
                agent_group=agent_group,
                session_key_id=session_key_id,
                started_at=now,
                expires_at=now + cached.relative_validity,
            )
            self._sessions[session.session_token] = session
            self._record("login_success", agent=agent, agent_group=agent_group)
            return session

    def fetch_key_from_auth(self, session_key_id: int) -> CachedWebsiteKey:
        cached = self._cached_key(session_key_id)
        if cached is not None:
            return cached
        flight = self._flight_lock(session_key_id)
        with flight:
            cached = self._cached_key(session_key_id)
            if cached is not None:
                return cached
            with self._lock:
                self._auth_redemptions[session_key_id] = (
                    self._auth_redemptions.get(session_key_id, 0) + 1
                )
            try:
                issue = self._auth.redeem_session_key(session_key_id)
            except AuthApiError as exc:
                if exc.status_code == 410:
                    raise KeyExpiredError(f"session key {session_key_id} expired") from exc
                raise AuthenticationFailed(
                    f"auth refused key retrieval ({exc.code})"
                ) from exc
            groups = issue["expected_owner_groups"]
            delegatee_group = groups[0] if groups else None
            agent_owner = next(
                (
                    (o["name"], o["group"])
                    for o in issue["prior_owners"]
                    if o["group"] == delegatee_group
                ),
                None,
            )
            entry = CachedWebsiteKey(
                session_key_id=session_key_id,
                key=bytes.fromhex(issue["key"]),
                agent_owner=agent_owner,
                relative_validity=issue["relative_validity_seconds"],
                absolute_expiration=issue["absolute_expiration"],
            )
            with self._lock:
                self._keys[session_key_id] = entry
            return entry

    def _cached_key(self, session_key_id: int) -> CachedWebsiteKey | None:
        with self._lock:
            entry = self._keys.get(session_key_id)
            if entry is None:
                return None
            if self.clock.now() >= entry.absolute_expiration:
                del self._keys[session_key_id]
                raise KeyExpiredError(f"session key {session_key_id} expired")
            return entry

    def _flight_lock(self, session_key_id: int) -> threading.Lock:
        with self._lock:
            return self._key_flights.setdefault(session_key_id, threading.Lock())

    # -- data access ------------------------------------------------------------

    def get_profile_field(self, session_token: str, field_name: str) -> str:
        if field_name not in PROFILE_FIELDS:
            raise UnknownField(f"no such profile field: {field_name}")
        session = self._session_for(session_token)
        policy = self._scopes.get(session.agent_group)
        if policy is None or field_name not in policy.allowed_fields:
            self._record(
                "access_denied", agent=session.agent, field=field_name,
                agent_group=session.agent_group,
            )
            raise AccessDenied(f"{field_name} outside {session.agent_group} scope")
        return self.profile.value_of(field_name)

    def execute_purchase(self, session_token: str, item: str) -> PurchaseRecord:
        session = self._session_for(session_token)
        policy = self._scopes.get(session.agent_group)
        if policy is None or not policy.may_purchase:
            self._record(
                "access_denied", agent=session.agent, field="purchase",
                agent_group=session.agent_group,
            )
            raise AccessDenied(f"{session.agent_group} may not purchase")
        with self._lock:
            record = PurchaseRecord(
                id=self._next_purchase_id,
                session_token=session_token,
                item=item,
                shipping_address=self.profile.address,
                card=self.profile.card,
                phone=self.profile.phone,
                placed_at=self.clock.now(),
            )
            self._next_purchase_id += 1
            self._purchases.append(record)
            self._record("purchase", agent=session.agent, item=item, purchase_id=record.id)
            return record

    def configure_scope(
        self, agent_group: str, allowed_fields: Iterable[str], may_purchase: bool
    ) -> ScopePolicy:
        policy = ScopePolicy(agent_group, frozenset(allowed_fields), may_purchase)
        with self._lock:
            # replaces any previous policy; open sessions see it on their next request
            self._scopes[agent_group] = policy
            self._record(
                "scope_updated",
                agent_group=agent_group,
                allowed_fields=sorted(policy.allowed_fields),
                may_purchase=may_purchase,
            )
            return policy

    def get_scope(self, agent_group: str) -> ScopePolicy | None:
        return self._scopes.get(agent_group)

    def scopes(self) -> dict[str, ScopePolicy]:
        with self._lock:
            return dict(self._scopes)

    # -- session lifecycle ---------------------------------------------------

    def expire_sessions(self, now: float | None = None) -> int:
        now = self.clock.now() if now is None else now
        with self._lock:
            expired = [t for t, s in self._sessions.items() if s.expires_at <= now]
            for token in expired:
                session = self._sessions.pop(token)
                self._record("session_terminated", agent=session.agent)
            return len(expired)

    def _session_for(self, session_token: str) -> AgentSession:
        with self._lock:
            session = self._sessions.get(session_token)
            if session is None:
                raise SessionError("unknown or terminated session")
            if self.clock.now() >= session.expires_at:
                del self._sessions[session_token]
                self._record("session_terminated", agent=session.agent)
                raise SessionError("session expired")
            return session

    # -- visibility -------------------------------------------------------------

    def list_sessions(self) -> list[dict[str, Any]]:
        with self._lock:
            now = self.clock.now()
            return [
                {
                    "agent": s.agent,
                    "agent_group": s.agent_group,
                    "started_at": s.started_at,
                    "expires_at": s.expires_at,
                    "active": now < s.expires_at,
                }
                for s in self._sessions.values()
            ]

    def list_purchases(self) -> list[dict[str, Any]]:
        with self._lock:
            return [
                {
                    "id": p.id,
                    "item": p.item,
                    "shipping_address": p.shipping_address,
                    "card": p.card,
                    "phone": p.phone,
                    "placed_at": p.placed_at,
                    "status": p.status,
                }
                for p in self._purchases
            ]

    def audit_events(self) -> list[dict[str, Any]]:
        with self._lock:
            return list(self._audit)

    def stats(self) -> dict[str, Any]:
        with self._lock:
            return {
                "auth_redemption_calls": sum(self._auth_redemptions.values()),
                "auth_redemption_calls_by_key": dict(self._auth_redemptions),
            }

    def _record(self, event: str, **detail: Any) -> None:
        with self._lock:
            self._audit.append({"at": self.clock.now(), "event": event, **detail})

    def _prune_challenges(self, now: float) -> None:
        stale = [
            cid
            for cid, ch in self._challenges.items()
            if ch.consumed or now >= ch.issued_at + CHALLENGE_TTL_SECONDS
        ]
        for cid in stale:
            del self._challenges[cid]
