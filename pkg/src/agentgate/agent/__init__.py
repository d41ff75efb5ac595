"""Protocol-driving agent: redeems a delegated session key, performs the
HMAC login, fetches permitted profile fields, and runs the mock purchase."""

from agentgate.agent.client import AgentClient, AgentConfig, TaskScript
from agentgate.agent.decider import Action, AgentTaskState, Decider, ScriptedDecider
from agentgate.agent.transcript import (
    CHANNEL_AGENT_AUTH,
    CHANNEL_AGENT_WEBSITE,
    ProtocolTranscript,
    TranscriptEvent,
)

__all__ = [
    "Action",
    "AgentClient",
    "AgentConfig",
    "AgentTaskState",
    "CHANNEL_AGENT_AUTH",
    "CHANNEL_AGENT_WEBSITE",
    "Decider",
    "ProtocolTranscript",
    "ScriptedDecider",
    "TaskScript",
    "TranscriptEvent",
]
