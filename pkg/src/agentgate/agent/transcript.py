"""Ordered record of every protocol exchange an agent performs.

Transcripts feed the harness's message counters; they never contain key
material, session tokens, or retrieved profile values.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

CHANNEL_AGENT_AUTH = "agent_auth"
CHANNEL_AGENT_WEBSITE = "agent_website"

TERMINAL_SUCCESS = "success"
TERMINAL_SUCCESS_WITH_DENIALS = "success_with_denials"
TERMINAL_DENIED = "denied"
TERMINAL_FAILED = "failed"


@dataclass(frozen=True)
class TranscriptEvent:
    channel: str
    direction: str  # "request" | "response"
    operation: str
    timestamp: float
    outcome: str


@dataclass
class ProtocolTranscript:
    agent: str
    agent_group: str
    events: list[TranscriptEvent] = field(default_factory=list)
    terminal_status: str = TERMINAL_FAILED
    started_at: float = 0.0
    finished_at: float = 0.0
    fields_fetched: list[str] = field(default_factory=list)
    denied_fields: list[str] = field(default_factory=list)
    purchase_outcome: str | None = None

    def record(
        self, channel: str, direction: str, operation: str, timestamp: float, outcome: str
    ) -> None:
        if self.events and timestamp < self.events[-1].timestamp:
            timestamp = self.events[-1].timestamp  # clamp: event order is authoritative
        self.events.append(TranscriptEvent(channel, direction, operation, timestamp, outcome))

    def request_count(self, channel: str) -> int:
        return sum(
            1 for e in self.events if e.channel == channel and e.direction == "request"
        )

    def redemption_count(self) -> int:
        return sum(
            1
            for e in self.events
            if e.channel == CHANNEL_AGENT_AUTH
            and e.direction == "request"
            and e.operation == "redeem_session_key"
        )

    def fetch_request_count(self) -> int:
        return sum(
            1
            for e in self.events
            if e.channel == CHANNEL_AGENT_WEBSITE
            and e.direction == "request"
            and e.operation == "fetch_field"
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "agent": self.agent,
            "agent_group": self.agent_group,
            "terminal_status": self.terminal_status,
            "started_at": self.started_at,
            "finished_at": self.finished_at,
            "fields_fetched": list(self.fields_fetched),
            "denied_fields": list(self.denied_fields),
            "purchase_outcome": self.purchase_outcome,
            "events": [
                {
                    "channel": e.channel,
                    "direction": e.direction,
                    "operation": e.operation,
                    "timestamp": e.timestamp,
                    "outcome": e.outcome,
                }
                for e in self.events
            ],
        }

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)

    @classmethod
    def from_dict(cls, doc: dict[str, Any]) -> "ProtocolTranscript":
        transcript = cls(
            agent=doc["agent"],
            agent_group=doc["agent_group"],
            terminal_status=doc.get("terminal_status", TERMINAL_FAILED),
            started_at=doc.get("started_at", 0.0),
            finished_at=doc.get("finished_at", 0.0),
            fields_fetched=list(doc.get("fields_fetched", [])),
            denied_fields=list(doc.get("denied_fields", [])),
            purchase_outcome=doc.get("purchase_outcome"),
        )
        for e in doc.get("events", []):
            transcript.events.append(
                TranscriptEvent(
                    e["channel"], e["direction"], e["operation"], e["timestamp"], e["outcome"]
                )
            )
        return transcript
