"""Signed request envelope securing entity-to-Auth traffic.

Every state-changing call to the auth service travels inside an envelope
signed with the sender's distribution key: an HMAC over
``timestamp || request_nonce || body``. The service enforces a clock-skew
bound on the timestamp and a replay window on (sender, request_nonce).
"""

from __future__ import annotations

import base64
import json
import threading
from dataclasses import dataclass
from typing import Any

from agentgate.core import (
    Clock,
    CryptoSpec,
    DEFAULT_CRYPTO_SPEC,
    RandomSource,
    SystemClock,
    SystemRandomSource,
    compute_hmac,
    constant_time_equal,
    rfc3339,
)

REQUEST_NONCE_BYTES = 16
DEFAULT_CLOCK_SKEW_SECONDS = 120.0
DEFAULT_REPLAY_RETENTION_SECONDS = 600.0


@dataclass(frozen=True)
class SignedRequest:
    sender: str
    timestamp: str  # RFC 3339, signed verbatim
    request_nonce: bytes
    body: bytes
    signature: bytes

    def to_wire(self) -> dict[str, str]:
        return {
            "sender": self.sender,
            "timestamp": self.timestamp,
            "request_nonce": self.request_nonce.hex(),
            "body": base64.b64encode(self.body).decode("ascii"),
            "signature": self.signature.hex(),
        }

    @classmethod
    def from_wire(cls, wire: dict[str, str]) -> "SignedRequest":
        return cls(
            sender=wire["sender"],
            timestamp=wire["timestamp"],
            request_nonce=bytes.fromhex(wire["request_nonce"]),
            body=base64.b64decode(wire["body"]),
            signature=bytes.fromhex(wire["signature"]),
        )

    def payload(self) -> Any:
        return json.loads(self.body)


def signing_input(timestamp: str, request_nonce: bytes, body: bytes) -> bytes:
    return timestamp.encode("ascii") + request_nonce + body


def canonical_body(payload: Any) -> bytes:
    return json.dumps(payload, sort_keys=True, separators=(",", ":")).encode("utf-8")


def sign_request(
    sender: str,
    payload: Any,
    distribution_key: bytes,
    *,
    clock: Clock | None = None,
    rng: RandomSource | None = None,
    spec: CryptoSpec = DEFAULT_CRYPTO_SPEC,
) -> SignedRequest:
    clock = clock or SystemClock()
    rng = rng or SystemRandomSource()
    timestamp = rfc3339(clock.now())
    nonce = rng.token_bytes(REQUEST_NONCE_BYTES)
    body = canonical_body(payload)
    signature = compute_hmac(distribution_key, signing_input(timestamp, nonce, body), spec)
    return SignedRequest(sender, timestamp, nonce, body, signature)


def signature_valid(
    request: SignedRequest, distribution_key: bytes, spec: CryptoSpec = DEFAULT_CRYPTO_SPEC
) -> bool:
    expected = compute_hmac(
        distribution_key,
        signing_input(request.timestamp, request.request_nonce, request.body),
        spec,
    )
    return constant_time_equal(expected, request.signature)


class ReplayCache:
    """Remembers (sender, request_nonce) pairs for the retention window."""

    def __init__(self, retention_seconds: float = DEFAULT_REPLAY_RETENTION_SECONDS) -> None:
        self.retention_seconds = retention_seconds
        self._seen: dict[tuple[str, bytes], float] = {}
        self._lock = threading.Lock()

    def check_and_store(self, sender: str, nonce: bytes, now: float) -> bool:
        """Record the nonce; return False when it was already seen."""
        key = (sender, nonce)
        with self._lock:
            cutoff = now - self.retention_seconds
            for stale in [k for k, ts in self._seen.items() if ts <= cutoff]:
                del self._seen[stale]
            if key in self._seen:
                return False
            self._seen[key] = now
            return True
