"""Shared domain types and cryptographic primitives.

Everything that crosses module boundaries lives here: trust levels and
their agent groups, the cipher-suite parameters, nonce generation, HMAC
tagging, session-key generation, and the injectable clock / randomness
sources that make the rest of the stack deterministic under test.

Hex lowercase is the canonical text encoding for key material and HMAC
tags wherever they cross a wire or a file.
"""

from __future__ import annotations

import enum
import hashlib
import hmac
import random
import secrets
import time
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Protocol

__all__ = [
    "CryptoSpec",
    "DEFAULT_CRYPTO_SPEC",
    "Clock",
    "ManualClock",
    "NONCE_DIGITS",
    "RandomSource",
    "SeededRandomSource",
    "SystemClock",
    "SystemRandomSource",
    "TrustLevel",
    "ValidityWindow",
    "compute_hmac",
    "constant_time_equal",
    "generate_nonce",
    "generate_session_key",
    "parse_rfc3339",
    "rfc3339",
    "validate_entity_name",
    "validate_group_name",
    "validate_nonce",
]

NONCE_DIGITS = 32
MIN_KEY_LENGTH_BYTES = 16


class TrustLevel(enum.Enum):
    """Agent trust classification, mapped bijectively to an agent group."""

    HIGH = "High"
    MEDIUM = "Medium"
    LOW = "Low"

    @property
    def group_name(self) -> str:
        return f"{self.value}TrustAgents"

    @classmethod
    def from_group(cls, group: str) -> "TrustLevel":
        for level in cls:
            if level.group_name == group:
                return level
        raise ValueError(f"not a trust group: {group!r}")

    @classmethod
    def parse(cls, text: str) -> "TrustLevel":
        for level in cls:
            if level.value.lower() == text.strip().lower():
                return level
        raise ValueError(f"unknown trust level: {text!r}")


TRUST_GROUPS = tuple(level.group_name for level in TrustLevel)


@dataclass(frozen=True)
class CryptoSpec:
    """Cipher-suite parameters: keyed-hash algorithm and key size."""

    hmac_algorithm: str = "sha256"
    key_length_bytes: int = 32

    def __post_init__(self) -> None:
        if self.hmac_algorithm not in hashlib.algorithms_available:
            raise ValueError(f"unknown hash algorithm: {self.hmac_algorithm!r}")
        if self.key_length_bytes < MIN_KEY_LENGTH_BYTES:
            raise ValueError(
                f"key_length_bytes must be >= {MIN_KEY_LENGTH_BYTES}, "
                f"got {self.key_length_bytes}"
            )

    @property
    def digest_size(self) -> int:
        return hashlib.new(self.hmac_algorithm).digest_size


DEFAULT_CRYPTO_SPEC = CryptoSpec()


@dataclass(frozen=True)
class ValidityWindow:
    """Relative validity (seconds from first use) plus a hard absolute deadline."""

    relative_validity: float
    absolute_expiration: float

    def __post_init__(self) -> None:
        if self.relative_validity <= 0:
            raise ValueError("relative_validity must be positive")


class RandomSource(Protocol):
    def token_bytes(self, n: int) -> bytes: ...


class SystemRandomSource:
    """CSPRNG-backed source for production use."""

    def token_bytes(self, n: int) -> bytes:
        return secrets.token_bytes(n)


class SeededRandomSource:
    """Deterministic source for tests and reproducible harness runs.

    Not cryptographically secure; never use outside tests/harness seeding.
    """

    def __init__(self, seed: int) -> None:
        self._rng = random.Random(seed)

    def token_bytes(self, n: int) -> bytes:
        return self._rng.randbytes(n)


class Clock(Protocol):
    def now(self) -> float: ...


class SystemClock:
    def now(self) -> float:
        return time.time()


class ManualClock:
    """Programmatically advanced clock; epoch-seconds, UTC."""

    def __init__(self, start: float = 1_767_225_600.0) -> None:  # 2026-01-01T00:00:00Z
        self._now = float(start)

    def now(self) -> float:
        return self._now

    def advance(self, seconds: float) -> float:
        if seconds < 0:
            raise ValueError("cannot move a clock backwards")
        self._now += seconds
        return self._now

    def set(self, ts: float) -> None:
        self._now = float(ts)


def rfc3339(ts: float) -> str:
    return (
        datetime.fromtimestamp(ts, tz=timezone.utc)
        .isoformat(timespec="microseconds")
        .replace("+00:00", "Z")
    )


def parse_rfc3339(text: str) -> float:
    return datetime.fromisoformat(text.replace("Z", "+00:00")).timestamp()


def validate_entity_name(name: str) -> str:
    if not name:
        raise ValueError("entity name must be non-empty")
    if not name.isprintable():
        raise ValueError(f"entity name contains unprintable characters: {name!r}")
    return name


def validate_group_name(group: str) -> str:
    if not group:
        raise ValueError("group name must be non-empty")
    return group


def generate_nonce(rng: RandomSource | None = None) -> str:
    """Return a fresh login challenge: a string of 32 decimal digits.

    Each digit is one random octet reduced mod 10. The slight modulo bias
    is acceptable for a single-use login challenge.
    """
    rng = rng or SystemRandomSource()
    stream = rng.token_bytes(NONCE_DIGITS)
    return "".join(str(b % 10) for b in stream)


def validate_nonce(nonce: str) -> str:
    if len(nonce) != NONCE_DIGITS or not nonce.isascii() or not nonce.isdigit():
        raise ValueError(f"nonce must be exactly {NONCE_DIGITS} decimal digits")
    return nonce


def compute_hmac(
    key: bytes, message: bytes, spec: CryptoSpec = DEFAULT_CRYPTO_SPEC
) -> bytes:
    """Keyed-hash tag over ``message`` under ``key`` per the configured suite."""
    if len(key) != spec.key_length_bytes:
        raise ValueError(
            f"key length {len(key)} does not match spec ({spec.key_length_bytes})"
        )
    return hmac.new(key, message, spec.hmac_algorithm).digest()


def generate_session_key(
    spec: CryptoSpec = DEFAULT_CRYPTO_SPEC, rng: RandomSource | None = None
) -> bytes:
    rng = rng or SystemRandomSource()
    return rng.token_bytes(spec.key_length_bytes)


def constant_time_equal(a: bytes, b: bytes) -> bool:
    """Timing-independent equality; False on length mismatch."""
    return hmac.compare_digest(a, b)
