"""Distributed-deployment latency model and message-count verification.

The model decomposes total latency into the locally measured end-to-end
time plus network round trips on the three channels:

    L_total = L_e2e + 4*L_a2A + 4*L_w2A + x*L_a2w,   x = 2 + n

where n is the number of profile fields fetched. The two 4x coefficients
are applied exactly as given; observed per-channel message counts are
reported alongside without being forced to 4 (one redemption round trip
per channel yields 2 one-way messages -- the report surfaces both numbers
and leaves the discrepancy visible).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterable

from agentgate.agent.transcript import (
    CHANNEL_AGENT_AUTH,
    CHANNEL_AGENT_WEBSITE,
    ProtocolTranscript,
)


@dataclass(frozen=True)
class LatencyModelParams:
    l_e2e: float
    l_a2a: float
    l_w2a: float
    l_a2w: float
    n: int

    def __post_init__(self) -> None:
        for name in ("l_e2e", "l_a2a", "l_w2a", "l_a2w"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if self.n < 0:
            raise ValueError("n must be non-negative")


def interaction_count(n: int) -> int:
    """Agent-website interactions: login page load + HMAC submission + n fetches."""
    if n < 0:
        raise ValueError("n must be non-negative")
    return 2 + n


def compute_total_latency(params: LatencyModelParams) -> float:
    return (
        params.l_e2e
        + 4.0 * params.l_a2a
        + 4.0 * params.l_w2a
        + interaction_count(params.n) * params.l_a2w
    )


@dataclass(frozen=True)
class MessageCounters:
    agent_auth: int
    website_auth: int
    agent_website: int


@dataclass(frozen=True)
class MessageCountCheck:
    index: int
    n: int
    expected: int
    observed: int
    ok: bool


@dataclass
class MessageCountReport:
    counters: MessageCounters
    checks: list[MessageCountCheck] = field(default_factory=list)
    all_ok: bool = True

    def to_dict(self) -> dict[str, Any]:
        return {
            "counters": {
                "agent_auth": self.counters.agent_auth,
                "website_auth": self.counters.website_auth,
                "agent_website": self.counters.agent_website,
            },
            "checks": [
                {
                    "index": c.index,
                    "n": c.n,
                    "expected": c.expected,
                    "observed": c.observed,
                    "ok": c.ok,
                }
                for c in self.checks
            ],
            "all_ok": self.all_ok,
        }


def _as_transcript(doc: ProtocolTranscript | dict[str, Any]) -> ProtocolTranscript:
    if isinstance(doc, ProtocolTranscript):
        return doc
    try:
        return ProtocolTranscript.from_dict(doc)
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed transcript: {exc}") from exc


def verify_message_counts(
    transcripts: Iterable[ProtocolTranscript | dict[str, Any]],
    website_auth_requests: int = 0,
) -> MessageCountReport:
    """Check every pure-fetch transcript against x = 2 + n."""
    agent_auth = agent_website = 0
    checks: list[MessageCountCheck] = []
    for index, doc in enumerate(transcripts):
        transcript = _as_transcript(doc)
        if any(
            e.operation == "purchase" and e.direction == "request"
            for e in transcript.events
        ):
            raise ValueError("message-count check expects pure-fetch transcripts")
        n = transcript.fetch_request_count()
        observed = transcript.request_count(CHANNEL_AGENT_WEBSITE)
        expected = interaction_count(n)
        checks.append(
            MessageCountCheck(
                index=index, n=n, expected=expected, observed=observed, ok=observed == expected
            )
        )
        agent_auth += transcript.request_count(CHANNEL_AGENT_AUTH)
        agent_website += observed
    return MessageCountReport(
        counters=MessageCounters(
            agent_auth=agent_auth,
            website_auth=website_auth_requests,
            agent_website=agent_website,
        ),
        checks=checks,
        all_ok=all(c.ok for c in checks),
    )
