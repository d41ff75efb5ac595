"""KDC-style authorization service: entity registry, communication policies,
delegated session keys with exactly-once issuance per expected owner group."""

from agentgate.authsvc.service import (
    AuthenticationFailure,
    AuthError,
    AuthorizationDenied,
    AuthService,
    CachedSessionKey,
    CommunicationPolicy,
    ConflictError,
    DelegationTarget,
    DuplicateIssuance,
    KeyExpired,
    RegisteredEntity,
    ReplayDetected,
    SessionKeyIssue,
    TargetType,
    UnknownKey,
    UsageError,
)

__all__ = [
    "AuthError",
    "AuthService",
    "AuthenticationFailure",
    "AuthorizationDenied",
    "CachedSessionKey",
    "CommunicationPolicy",
    "ConflictError",
    "DelegationTarget",
    "DuplicateIssuance",
    "KeyExpired",
    "RegisteredEntity",
    "ReplayDetected",
    "SessionKeyIssue",
    "TargetType",
    "UnknownKey",
    "UsageError",
]
