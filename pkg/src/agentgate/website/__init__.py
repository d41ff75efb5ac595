"""Access-controlled website: HMAC challenge login for agents, per-group
scopes over profile data, relative-validity sessions, simulated purchases."""

from agentgate.website.service import (
    AccessDenied,
    AgentSession,
    AuthenticationFailed,
    CachedWebsiteKey,
    Challenge,
    ChallengeError,
    DEFAULT_SCOPE_MAP,
    KeyExpiredError,
    PROFILE_FIELDS,
    PurchaseRecord,
    ScopePolicy,
    SessionError,
    UnknownField,
    UsageError,
    UserProfile,
    WebsiteError,
    WebsiteService,
)

__all__ = [
    "AccessDenied",
    "AgentSession",
    "AuthenticationFailed",
    "CachedWebsiteKey",
    "Challenge",
    "ChallengeError",
    "DEFAULT_SCOPE_MAP",
    "KeyExpiredError",
    "PROFILE_FIELDS",
    "PurchaseRecord",
    "ScopePolicy",
    "SessionError",
    "UnknownField",
    "UsageError",
    "UserProfile",
    "WebsiteError",
    "WebsiteService",
]
