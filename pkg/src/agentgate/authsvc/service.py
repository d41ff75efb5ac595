"""Auth service state machine: registered entities, communication policies,
and cached session keys with exactly-once issuance per expected owner group.

All table mutations run under one lock so check-then-register on a key's
owner slots is atomic; read-only queries may run concurrently.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

from agentgate.core import (
    Clock,
    CryptoSpec,
    DEFAULT_CRYPTO_SPEC,
    RandomSource,
    SystemClock,
    SystemRandomSource,
    TrustLevel,
    ValidityWindow,
    generate_session_key,
    parse_rfc3339,
    validate_entity_name,
    validate_group_name,
)
from agentgate.authsvc.envelope import (
    DEFAULT_CLOCK_SKEW_SECONDS,
    DEFAULT_REPLAY_RETENTION_SECONDS,
    ReplayCache,
    SignedRequest,
    signature_valid,
)
from agentgate.authsvc.eventlog import EventLog

DEFAULT_DIST_KEY_VALIDITY_SECONDS = 365 * 86400.0


class AuthError(Exception):
    """Base class; `code` is the stable machine-readable error identifier."""

    code = "auth_error"


class AuthenticationFailure(AuthError):
    code = "authentication_failure"


class AuthorizationDenied(AuthError):
    code = "authorization_denied"


class DuplicateIssuance(AuthError):
    code = "duplicate_issuance"


class UnknownKey(AuthError):
    code = "unknown_key"


class KeyExpired(AuthError):
    code = "expired"


class ReplayDetected(AuthError):
    code = "replay"


class ConflictError(AuthError):
    code = "conflict"


class UsageError(AuthError):
    code = "usage_error"


class TargetType(str, Enum):
    GROUP = "Group"
    DELEGATION = "Delegation"


@dataclass(frozen=True)
class DelegationTarget:
    delegatee_group: str
    target_group: str

    def __post_init__(self) -> None:
        validate_group_name(self.delegatee_group)
        validate_group_name(self.target_group)
        if self.delegatee_group == self.target_group:
            raise UsageError("delegatee_group must differ from target_group")


@dataclass
class RegisteredEntity:
    name: str
    group: str
    distribution_key: bytes
    spec: CryptoSpec
    dist_key_validity: "ValidityWindow"


@dataclass
class CommunicationPolicy:
    policy_id: int
    requesting_group: str
    target_type: TargetType
    target: str | DelegationTarget
    crypto: CryptoSpec
    relative_validity: float
    absolute_validity: float

    def matching_key(self) -> tuple:
        if isinstance(self.target, DelegationTarget):
            target_key: Any = (self.target.delegatee_group, self.target.target_group)
        else:
            target_key = self.target
        return (self.requesting_group, self.target_type.value, target_key)


@dataclass
class CachedSessionKey:
    id: int
    key: bytes
    owners: list[tuple[str, str]] = field(default_factory=list)  # (entity, group)
    expected_owner_groups: list[str] = field(default_factory=list)
    purpose: str = ""
    relative_validity: float = 0.0
    absolute_expiration: float = 0.0


@dataclass
class SessionKeyIssue:
    """Redemption result; `prior_owners` excludes the requester itself."""

    id: int
    key: bytes
    expected_owner_groups: list[str]
    prior_owners: list[tuple[str, str]]
    relative_validity: float
    absolute_expiration: float


class AuthService:
    def __init__(
        self,
        *,
        clock: Clock | None = None,
        rng: RandomSource | None = None,
        event_log_path: str | None = None,
        clock_skew: float = DEFAULT_CLOCK_SKEW_SECONDS,
        replay_retention: float = DEFAULT_REPLAY_RETENTION_SECONDS,
        crypto_spec: CryptoSpec = DEFAULT_CRYPTO_SPEC,
    ) -> None:
        self.clock = clock or SystemClock()
        self.rng = rng or SystemRandomSource()
        self.clock_skew = clock_skew
        self.default_spec = crypto_spec
        self._entities: dict[str, RegisteredEntity] = {}
        self._policies: dict[int, CommunicationPolicy] = {}
        self._keys: dict[int, CachedSessionKey] = {}
        self._purged_ids: set[int] = set()
        self._next_policy_id = 1
        self._next_key_id = 1
        self._replay = ReplayCache(replay_retention)
        self._lock = threading.RLock()
        self._log = EventLog(event_log_path)
        self._replay_log()

    # -- provisioning ------------------------------------------------------

    def register_entity(
        self,
        name: str,
        group: str,
        spec: CryptoSpec | None = None,
        dist_key_validity: float = DEFAULT_DIST_KEY_VALIDITY_SECONDS,
    ) -> RegisteredEntity:
        validate_entity_name(name)
        validate_group_name(group)
        spec = spec or self.default_spec
        with self._lock:
            if name in self._entities:
                raise ConflictError(f"entity already registered: {name}")
            now = self.clock.now()
            entity = RegisteredEntity(
                name=name,
                group=group,
                distribution_key=generate_session_key(spec, self.rng),
                spec=spec,
                dist_key_validity=ValidityWindow(
                    relative_validity=dist_key_validity,
                    absolute_expiration=now + dist_key_validity,
                ),
            )
            self._entities[name] = entity
            self._log.append(
                "entity_registered",
                name=name,
                group=group,
                hmac_algorithm=spec.hmac_algorithm,
                key_length_bytes=spec.key_length_bytes,
                distribution_key_hex=entity.distribution_key.hex(),
                dist_key_relative_validity=entity.dist_key_validity.relative_validity,
                dist_key_absolute_expiration=entity.dist_key_validity.absolute_expiration,
            )
            return entity

    def add_policy(
        self,
        requesting_group: str,
        target_type: TargetType | str,
        target: str | DelegationTarget,
        *,
        crypto: CryptoSpec | None = None,
        relative_validity: float,
        absolute_validity: float,
    ) -> int:
        validate_group_name(requesting_group)
        target_type = TargetType(target_type)
        if target_type is TargetType.DELEGATION and not isinstance(target, DelegationTarget):
            raise UsageError("Delegation policies need a DelegationTarget")
        if target_type is TargetType.GROUP and not isinstance(target, str):
            raise UsageError("Group policies need a group-name target")
        if relative_validity <= 0 or absolute_validity <= 0:
            raise UsageError("validity durations must be positive")
        policy = CommunicationPolicy(
            policy_id=0,
            requesting_group=requesting_group,
            target_type=target_type,
            target=target,
            crypto=crypto or self.default_spec,
            relative_validity=relative_validity,
            absolute_validity=absolute_validity,
        )
        with self._lock:
            # re-adding the same (requesting_group, target) replaces the old row
            for existing in list(self._policies.values()):
                if existing.matching_key() == policy.matching_key():
                    del self._policies[existing.policy_id]
            policy.policy_id = self._next_policy_id
            self._next_policy_id += 1
            self._policies[policy.policy_id] = policy
            self._log.append("policy_added", **self._policy_event(policy))
            return policy.policy_id

    def remove_policy(self, policy_id: int) -> None:
        with self._lock:
            if self._policies.pop(policy_id, None) is not None:
                self._log.append("policy_removed", policy_id=policy_id)

    def find_delegation_policy(
        self, requesting_group: str, delegatee_group: str, target_group: str
    ) -> CommunicationPolicy | None:
        with self._lock:
            for policy in self._policies.values():
                if (
                    policy.target_type is TargetType.DELEGATION
                    and policy.requesting_group == requesting_group
                    and isinstance(policy.target, DelegationTarget)
                    and policy.target.delegatee_group == delegatee_group
                    and policy.target.target_group == target_group
                ):
                    return policy
        return None

    # -- signed request verification ---------------------------------------

    def verify_signed_request(self, request: SignedRequest) -> RegisteredEntity:
        now = self.clock.now()
        entity = self._entities.get(request.sender)
        if entity is None:
            raise AuthenticationFailure(f"unknown sender: {request.sender}")
        if now >= entity.dist_key_validity.absolute_expiration:
            raise AuthenticationFailure("distribution key expired")
        if not signature_valid(request, entity.distribution_key, entity.spec):
            raise AuthenticationFailure("bad signature")
        try:
            sent_at = parse_rfc3339(request.timestamp)
        except ValueError as exc:
            raise AuthenticationFailure("unparseable timestamp") from exc
        if abs(now - sent_at) > self.clock_skew:
            raise AuthenticationFailure("timestamp outside clock-skew window")
        if not self._replay.check_and_store(request.sender, request.request_nonce, now):
            raise ReplayDetected("request nonce already seen")
        return entity

    # -- delegation lifecycle ----------------------------------------------

    def create_delegated_session_key(self, request: SignedRequest) -> CachedSessionKey:
        """Create a key for delegated access; the caller must only ever
        forward the id, never the key material."""
        sender = self.verify_signed_request(request)
        payload = request.payload()
        try:
            trust = TrustLevel.parse(payload["trust"])
            target_group = validate_group_name(payload["target_group"])
            purpose = str(payload.get("purpose", ""))
        except (KeyError, TypeError, ValueError) as exc:
            raise UsageError(f"malformed delegation request: {exc}") from exc
        with self._lock:
            policy = self.find_delegation_policy(
                sender.group, trust.group_name, target_group
            )
            if policy is None:
                raise AuthorizationDenied(
                    f"no delegation policy for {sender.group} -> "
                    f"{trust.group_name} -> {target_group}"
                )
            now = self.clock.now()
            key = CachedSessionKey(
                id=self._next_key_id,
                key=generate_session_key(policy.crypto, self.rng),
                owners=[],
                expected_owner_groups=[trust.group_name, target_group],
                purpose=purpose,
                relative_validity=policy.relative_validity,
                absolute_expiration=now + policy.absolute_validity,
            )
            self._next_key_id += 1
            self._keys[key.id] = key
            self._log.append(
                "key_created",
                key_id=key.id,
                key_hex=key.key.hex(),
                expected_owner_groups=key.expected_owner_groups,
                purpose=key.purpose,
                relative_validity=key.relative_validity,
                absolute_expiration=key.absolute_expiration,
            )
            return key

    def request_session_key(self, request: SignedRequest) -> SessionKeyIssue:
        """Redeem a session key id: issued at most once per expected owner
        group, atomically with owner registration."""
        sender = self.verify_signed_request(request)
        payload = request.payload()
        try:
            key_id = int(payload["id"])
        except (KeyError, TypeError, ValueError) as exc:
            raise UsageError(f"malformed redemption request: {exc}") from exc
        with self._lock:
            key = self._keys.get(key_id)
            if key is None:
                if key_id in self._purged_ids:
                    raise KeyExpired(f"session key {key_id} expired")
                raise UnknownKey(f"no session key with id {key_id}")
            now = self.clock.now()
            if now >= key.absolute_expiration:
                self._purge_key(key_id)
                raise KeyExpired(f"session key {key_id} expired")
            if sender.group not in key.expected_owner_groups:
                raise AuthorizationDenied(
                    f"group {sender.group} not among expected owner groups"
                )
            if any(group == sender.group for _, group in key.owners):
                raise DuplicateIssuance(
                    f"group {sender.group} already owns session key {key_id}"
                )
            prior_owners = list(key.owners)
            key.owners.append((sender.name, sender.group))
            self._log.append(
                "owner_registered", key_id=key_id, entity=sender.name, group=sender.group
            )
            return SessionKeyIssue(
                id=key.id,
                key=key.key,
                expected_owner_groups=list(key.expected_owner_groups),
                prior_owners=prior_owners,
                relative_validity=key.relative_validity,
                absolute_expiration=key.absolute_expiration,
            )

    def purge_expired_keys(self, now: float | None = None) -> int:
        now = self.clock.now() if now is None else now
        with self._lock:
            expired = [k.id for k in self._keys.values() if k.absolute_expiration <= now]
            for key_id in expired:
                self._purge_key(key_id)
            return len(expired)

    def _purge_key(self, key_id: int) -> None:
        del self._keys[key_id]
        self._purged_ids.add(key_id)
        self._log.append("key_purged", key_id=key_id)

    # -- introspection (tests, harness) -------------------------------------

    def get_entity(self, name: str) -> RegisteredEntity | None:
        return self._entities.get(name)

    def get_key(self, key_id: int) -> CachedSessionKey | None:
        return self._keys.get(key_id)

    def snapshot(self) -> dict[str, Any]:
        with self._lock:
            return {
                "entities": {n: e.group for n, e in self._entities.items()},
                "policies": len(self._policies),
                "keys": {
                    k.id: {
                        "owners": list(k.owners),
                        "expected_owner_groups": list(k.expected_owner_groups),
                        "absolute_expiration": k.absolute_expiration,
                    }
                    for k in self._keys.values()
                },
                "purged_ids": sorted(self._purged_ids),
            }

    # -- event-log persistence ----------------------------------------------

    def _policy_event(self, policy: CommunicationPolicy) -> dict[str, Any]:
        target: Any
        if isinstance(policy.target, DelegationTarget):
            target = {
                "delegatee_group": policy.target.delegatee_group,
                "target_group": policy.target.target_group,
            }
        else:
            target = policy.target
        return {
            "policy_id": policy.policy_id,
            "requesting_group": policy.requesting_group,
            "target_type": policy.target_type.value,
            "target": target,
            "hmac_algorithm": policy.crypto.hmac_algorithm,
            "key_length_bytes": policy.crypto.key_length_bytes,
            "relative_validity": policy.relative_validity,
            "absolute_validity": policy.absolute_validity,
        }

    def _replay_log(self) -> None:
        for event in self._log.replay():
            kind = event["kind"]
            if kind == "entity_registered":
                spec = CryptoSpec(event["hmac_algorithm"], event["key_length_bytes"])
                self._entities[event["name"]] = RegisteredEntity(
                    name=event["name"],
                    group=event["group"],
                    distribution_key=bytes.fromhex(event["distribution_key_hex"]),
                    spec=spec,
                    dist_key_validity=ValidityWindow(
                        relative_validity=event["dist_key_relative_validity"],
                        absolute_expiration=event["dist_key_absolute_expiration"],
                    ),
                )
            elif kind == "policy_added":
                raw_target = event["target"]
                target: str | DelegationTarget
                if isinstance(raw_target, dict):
                    target = DelegationTarget(
                        raw_target["delegatee_group"], raw_target["target_group"]
                    )
                else:
                    target = raw_target
                policy = CommunicationPolicy(
                    policy_id=event["policy_id"],
                    requesting_group=event["requesting_group"],
                    target_type=TargetType(event["target_type"]),
                    target=target,
                    crypto=CryptoSpec(event["hmac_algorithm"], event["key_length_bytes"]),
                    relative_validity=event["relative_validity"],
                    absolute_validity=event["absolute_validity"],
                )
                for existing in list(self._policies.values()):
                    if existing.matching_key() == policy.matching_key():
                        del self._policies[existing.policy_id]
                self._policies[policy.policy_id] = policy
                self._next_policy_id = max(self._next_policy_id, policy.policy_id + 1)
            elif kind == "policy_removed":
                self._policies.pop(event["policy_id"], None)
            elif kind == "key_created":
                key = CachedSessionKey(
                    id=event["key_id"],
                    key=bytes.fromhex(event["key_hex"]),
                    owners=[],
                    expected_owner_groups=list(event["expected_owner_groups"]),
                    purpose=event["purpose"],
                    relative_validity=event["relative_validity"],
                    absolute_expiration=event["absolute_expiration"],
                )
                self._keys[key.id] = key
                self._next_key_id = max(self._next_key_id, key.id + 1)
            elif kind == "owner_registered":
                key = self._keys.get(event["key_id"])
                if key is not None:
                    key.owners.append((event["entity"], event["group"]))
            elif kind == "key_purged":
                self._keys.pop(event["key_id"], None)
                self._purged_ids.add(event["key_id"])
                self._next_key_id = max(self._next_key_id, event["key_id"] + 1)
