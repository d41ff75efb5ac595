"""Evaluation harness: fixture provisioning, the four validation scenarios,
the network latency model, message-count checks, and report emission."""

from agentgate.harness.latency import (
    LatencyModelParams,
    MessageCounters,
    MessageCountReport,
    compute_total_latency,
    interaction_count,
    verify_message_counts,
)
from agentgate.harness.scenarios import SCENARIOS, TrialResult, run_scenario

__all__ = [
    "LatencyModelParams",
    "MessageCounters",
    "MessageCountReport",
    "SCENARIOS",
    "TrialResult",
    "compute_total_latency",
    "interaction_count",
    "run_scenario",
    "verify_message_counts",
]
